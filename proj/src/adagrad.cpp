#include "holonet/adagrad.hpp"

#include "holonet/error.hpp"

#include <cmath>

namespace holonet {

void adagrad_step(std::span<const ParamRef> params, std::span<const Matrix* const> grads,
                  AdagradState& state) {
    if (params.size() != grads.size()) {
        throw ShapeError("adagrad_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k] == nullptr) continue;
        if (!grads[k]->same_shape(*params[k].value)) {
            throw ShapeError("gradient for '" + params[k].name + "' is " + shape_string(*grads[k]) +
                             ", parameter is " + shape_string(*params[k].value));
        }
        if (!grads[k]->all_finite()) {
            throw NumericalError("non-finite gradient for parameter '" + params[k].name + "'");
        }
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k] == nullptr) continue;
        Matrix& theta = *params[k].value;
        const Matrix& g = *grads[k];
        auto [it, inserted] = state.accumulators.try_emplace(params[k].name, theta.rows(), theta.cols());
        Matrix& acc = it->second;
        if (!acc.same_shape(theta)) {
            throw ShapeError("accumulator for '" + params[k].name + "' has the wrong shape");
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            acc[i] += g[i] * g[i];
            theta[i] -= state.learning_rate * g[i] / (std::sqrt(acc[i]) + state.epsilon);
        }
    }
}

}  // namespace holonet
