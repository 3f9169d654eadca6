#include "holonet/prior.hpp"

#include "holonet/error.hpp"

#include <cmath>

namespace holonet {

std::string_view to_string(SampleMode m) {
    return m == SampleMode::VectorPerGaussian ? "vector_per_gaussian" : "iid_mixture_draws";
}

SampleMode sample_mode_from_string(std::string_view name) {
    if (name == "vector_per_gaussian") return SampleMode::VectorPerGaussian;
    if (name == "iid_mixture_draws") return SampleMode::IidMixtureDraws;
    throw ConfigError("unknown prior sample mode '" + std::string(name) + "'");
}

double MixturePrior::sigma(std::size_t condition, std::size_t k) const {
    return std::abs(sigma_raw(condition, k)) + ad::kSigmaFloor;
}

MixturePrior init_prior(std::size_t num_conditions, std::size_t components, Rng& rng,
                        SampleMode mode, std::size_t draw_dim) {
    if (num_conditions == 0 || components == 0) {
        throw ConfigError("prior needs at least one condition and one component");
    }
    if (mode == SampleMode::IidMixtureDraws && draw_dim == 0) {
        throw ConfigError("iid_mixture_draws needs a positive draw dimension");
    }
    MixturePrior p;
    p.mu = Matrix(num_conditions, components);
    p.sigma_raw = Matrix(num_conditions, components);
    for (auto& v : p.mu.values()) v = rng.uniform();
    for (auto& v : p.sigma_raw.values()) v = rng.uniform();
    p.mode = mode;
    p.draw_dim = draw_dim;
    return p;
}

PriorNoise draw_prior_noise(const MixturePrior& prior, std::span<const std::size_t> conditions,
                            Rng& rng) {
    const std::size_t k = prior.components();
    const std::size_t width = prior.sample_dim();
    PriorNoise noise{Matrix(conditions.size(), width), {}};
    noise.gather.resize(conditions.size() * width);
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const std::size_t c = conditions[i];
        if (c >= prior.num_conditions()) {
            throw DataError("condition " + std::to_string(c) + " outside prior with " +
                            std::to_string(prior.num_conditions()) + " conditions");
        }
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t component =
                prior.mode == SampleMode::VectorPerGaussian ? j : static_cast<std::size_t>(rng.below(k));
            noise.gather[i * width + j] = c * k + component;
            noise.eps(i, j) = rng.normal();
        }
    }
    return noise;
}

ad::NodeId prior_sample_node(ParamNodes& params, const MixturePrior& prior, const PriorNoise& noise,
                             const std::string& name) {
    ad::Graph& g = params.graph();
    const ad::NodeId mu = params(prior.mu, name + ".mu");
    const ad::NodeId sigma = params(prior.sigma_raw, name + ".sigma_raw");
    const ad::NodeId eps = g.constant(noise.eps, name + ".eps");
    return g.gaussian_reparam(mu, sigma, eps, noise.gather);
}

Matrix sample_prior(const MixturePrior& prior, std::size_t condition, Rng& rng) {
    const std::size_t conditions[] = {condition};
    const PriorNoise noise = draw_prior_noise(prior, conditions, rng);
    Matrix out(1, noise.eps.cols());
    for (std::size_t j = 0; j < out.cols(); ++j) {
        const std::size_t g = noise.gather[j];
        out[j] = prior.mu[g] + (std::abs(prior.sigma_raw[g]) + ad::kSigmaFloor) * noise.eps[j];
    }
    return out;
}

}  // namespace holonet
