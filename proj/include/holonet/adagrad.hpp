#pragma once

#include "holonet/layers.hpp"
#include "holonet/matrix.hpp"

#include <map>
#include <span>
#include <string>

namespace holonet {

/// Per-parameter squared-gradient accumulators, keyed by parameter name.
struct AdagradState {
    double learning_rate = 0.01;
    double epsilon = 1e-8;
    std::map<std::string, Matrix> accumulators;
};

/// G += g⊙g; θ −= lr·g / (sqrt(G) + ε) for every parameter. A null gradient
/// pointer skips that parameter. Throws NumericalError naming the parameter if
/// any gradient is non-finite, before touching any parameter.
void adagrad_step(std::span<const ParamRef> params, std::span<const Matrix* const> grads,
                  AdagradState& state);

}  // namespace holonet
