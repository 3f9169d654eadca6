#pragma once

#include "holonet/autodiff.hpp"
#include "holonet/layers.hpp"
#include "holonet/matrix.hpp"
#include "holonet/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace holonet {

/// How a prior row is drawn from a condition's K Gaussians.
enum class SampleMode {
    /// One draw from each Gaussian; the row has K entries.
    VectorPerGaussian,
    /// D scalar draws, each from a uniformly chosen Gaussian of the mixture.
    IidMixtureDraws,
};

std::string_view to_string(SampleMode m);
SampleMode sample_mode_from_string(std::string_view name);

/// One trainable Gaussian mixture per condition. Row c of mu / sigma_raw holds
/// the K component means and raw scales of condition c; the effective scale
/// is |sigma_raw| + 1e-6.
struct MixturePrior {
    Matrix mu;
    Matrix sigma_raw;
    SampleMode mode = SampleMode::VectorPerGaussian;
    std::size_t draw_dim = 0;  // D, used by IidMixtureDraws

    std::size_t num_conditions() const noexcept { return mu.rows(); }
    std::size_t components() const noexcept { return mu.cols(); }
    /// Width of one sample row.
    std::size_t sample_dim() const noexcept {
        return mode == SampleMode::VectorPerGaussian ? components() : draw_dim;
    }
    double sigma(std::size_t condition, std::size_t k) const;
};

/// mu and sigma_raw entries i.i.d. uniform on [0, 1].
MixturePrior init_prior(std::size_t num_conditions, std::size_t components, Rng& rng,
                        SampleMode mode = SampleMode::VectorPerGaussian, std::size_t draw_dim = 0);

/// Noise drawn ahead of graph construction: standard normals plus, per
/// element, the flat offset of the Gaussian it belongs to.
struct PriorNoise {
    Matrix eps;
    std::vector<std::size_t> gather;
};

PriorNoise draw_prior_noise(const MixturePrior& prior, std::span<const std::size_t> conditions,
                            Rng& rng);

/// Reparameterized sample rows mu + sigma·eps as a graph node.
ad::NodeId prior_sample_node(ParamNodes& params, const MixturePrior& prior, const PriorNoise& noise,
                             const std::string& name = "prior");

/// One sample row for `condition`.
Matrix sample_prior(const MixturePrior& prior, std::size_t condition, Rng& rng);

}  // namespace holonet
