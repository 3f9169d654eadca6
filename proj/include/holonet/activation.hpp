#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace holonet {

/// Elementwise non-linearities. Sine10 is 10·sin(x); SineNorm01 is (sin(x)+1)/2.
enum class ActivationKind {
    Identity,
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu,
    Sine,
    SineNorm01,
    Sine10,
};

inline constexpr double kLeakyReluSlope = 0.01;

double activate(ActivationKind kind, double x);
/// Derivative with respect to the pre-activation input. relu'(0) = 0.
double activate_derivative(ActivationKind kind, double x);

/// Closed output range [lo, hi]; unbounded kinds return nullopt.
struct ActivationRange {
    double lo;
    double hi;
};
std::optional<ActivationRange> activation_range(ActivationKind kind);

/// True where the derivative is discontinuous (relu and lrelu at 0).
bool has_kink_at(ActivationKind kind, double x, double margin);

std::string_view to_string(ActivationKind kind);
/// Accepts the canonical names: identity, sigmoid, tanh, relu, lrelu, sine,
/// sine_norm01, sin10.
ActivationKind activation_from_string(std::string_view name);

}  // namespace holonet
