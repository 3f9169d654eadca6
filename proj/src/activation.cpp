#include "holonet/activation.hpp"

#include "holonet/error.hpp"

#include <cmath>

namespace holonet {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double activate(ActivationKind kind, double x) {
    switch (kind) {
        case ActivationKind::Identity: return x;
        case ActivationKind::Sigmoid: return sigmoid(x);
        case ActivationKind::Tanh: return std::tanh(x);
        case ActivationKind::Relu: return x > 0 ? x : 0.0;
        case ActivationKind::LeakyRelu: return x > 0 ? x : kLeakyReluSlope * x;
        case ActivationKind::Sine: return std::sin(x);
        case ActivationKind::SineNorm01: return 0.5 * (std::sin(x) + 1.0);
        case ActivationKind::Sine10: return 10.0 * std::sin(x);
    }
    return x;
}

double activate_derivative(ActivationKind kind, double x) {
    switch (kind) {
        case ActivationKind::Identity: return 1.0;
        case ActivationKind::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case ActivationKind::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::Relu: return x > 0 ? 1.0 : 0.0;
        case ActivationKind::LeakyRelu: return x > 0 ? 1.0 : kLeakyReluSlope;
        case ActivationKind::Sine: return std::cos(x);
        case ActivationKind::SineNorm01: return 0.5 * std::cos(x);
        case ActivationKind::Sine10: return 10.0 * std::cos(x);
    }
    return 1.0;
}

std::optional<ActivationRange> activation_range(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Sigmoid: return ActivationRange{0.0, 1.0};
        case ActivationKind::Tanh: return ActivationRange{-1.0, 1.0};
        case ActivationKind::Sine: return ActivationRange{-1.0, 1.0};
        case ActivationKind::SineNorm01: return ActivationRange{0.0, 1.0};
        case ActivationKind::Sine10: return ActivationRange{-10.0, 10.0};
        default: return std::nullopt;
    }
}

bool has_kink_at(ActivationKind kind, double x, double margin) {
    const bool kinked = kind == ActivationKind::Relu || kind == ActivationKind::LeakyRelu;
    return kinked && std::abs(x) < margin;
}

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Identity: return "identity";
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Relu: return "relu";
        case ActivationKind::LeakyRelu: return "lrelu";
        case ActivationKind::Sine: return "sine";
        case ActivationKind::SineNorm01: return "sine_norm01";
        case ActivationKind::Sine10: return "sin10";
    }
    return "?";
}

ActivationKind activation_from_string(std::string_view name) {
    for (auto kind : {ActivationKind::Identity, ActivationKind::Sigmoid, ActivationKind::Tanh,
                      ActivationKind::Relu, ActivationKind::LeakyRelu, ActivationKind::Sine,
                      ActivationKind::SineNorm01, ActivationKind::Sine10}) {
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

}  // namespace holonet
