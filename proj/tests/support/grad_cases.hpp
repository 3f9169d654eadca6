#pragma once

// Sampled operand sets for gradient checks. Shared by the unit tests and the
// acceptance binary so both exercise exactly the same points.

#include "holonet/autodiff.hpp"
#include "holonet/hna.hpp"
#include "holonet/layers.hpp"
#include "holonet/matrix.hpp"
#include "holonet/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace holonet::testing {

struct GradCase {
    std::string name;
    ad::NodeKind kind;
    /// Draws one operand set; kinked activations keep |x| >= 1e-3.
    std::function<std::vector<Matrix>(Rng&)> sample;
};

/// One case per differentiable node kind (each activation counts as a kind,
/// and MatMul appears with and without the transposed right operand).
std::vector<GradCase> grad_cases();

Matrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);

/// Tiny model used for end-to-end checks: widths 3, K = 2, default depths.
HnaModel tiny_hna(HnaMode mode, std::uint64_t seed);

/// Builds one output node from parameter nodes; called once per evaluation.
using ModelBuilder = std::function<ad::NodeId(ParamNodes&)>;

/// Central differences of L = Σ w⊙output against reverse mode over every
/// entry of `params`, with w drawn uniformly from [-1, 1] by `weight_seed`.
ad::GradCheckResult model_grad_check(const std::vector<ParamRef>& params, const ModelBuilder& build,
                                     std::uint64_t weight_seed, double epsilon = 1e-5);

/// Central differences of L = Σ w⊙output against reverse mode, over every
/// entry of every model parameter. Batch, prior noise, weights and the model
/// itself are drawn from `seed`. Error per entry is |a − n| / max(1, |a|).
ad::GradCheckResult tiny_hna_grad_check(HnaMode mode, std::uint64_t seed, double epsilon = 1e-5);

}  // namespace holonet::testing
