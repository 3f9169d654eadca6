#pragma once

#include "holonet/activation.hpp"
#include "holonet/autodiff.hpp"
#include "holonet/matrix.hpp"
#include "holonet/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace holonet {

/// Where the bias enters a layer: f(Wx) + b or f(Wx + b).
enum class BiasPlacement { PostActivation, PreActivation };

std::string_view to_string(BiasPlacement p);
BiasPlacement bias_placement_from_string(std::string_view name);

/// Fully connected layer. W is out×in, b is 1×out.
struct DenseLayer {
    Matrix weight;
    Matrix bias;
    ActivationKind activation = ActivationKind::Identity;
    BiasPlacement bias_placement = BiasPlacement::PreActivation;

    std::size_t in_dim() const noexcept { return weight.cols(); }
    std::size_t out_dim() const noexcept { return weight.rows(); }
};

/// Uniform on [-L, L] with L = sqrt(6 / (fan_in + fan_out)); shape fan_out×fan_in.
Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

DenseLayer make_dense(std::size_t in, std::size_t out, ActivationKind activation,
                      BiasPlacement placement, Rng& rng);

/// A named reference to a trainable array owned by a model.
struct ParamRef {
    std::string name;
    Matrix* value;
};

/// Creates parameter nodes on demand so each array appears once per graph.
class ParamNodes {
public:
    explicit ParamNodes(ad::Graph& graph) : graph_(graph) {}
    ad::NodeId operator()(const Matrix& storage, const std::string& name);
    /// Node id for each registered array, for routing gradients back.
    const std::map<const Matrix*, ad::NodeId>& ids() const { return ids_; }
    ad::Graph& graph() { return graph_; }

private:
    ad::Graph& graph_;
    std::map<const Matrix*, ad::NodeId> ids_;
};

/// Graph form of a conventional layer: f(x·Wᵀ + b) or f(x·Wᵀ) + b.
ad::NodeId dense_node(ParamNodes& params, const DenseLayer& layer, const std::string& name,
                      ad::NodeId x);

/// Graph form of the backbone skip layer
///     h_n = f(W_n · (h_{n-1} | s_n)) + b_n,
/// where s_n repeats the observer scalar to the width of h_{n-1}. With
/// PreActivation placement the bias moves inside f.
ad::NodeId dense_skip_node(ParamNodes& params, const DenseLayer& layer, const std::string& name,
                           ad::NodeId h_prev, ad::NodeId observer);

/// Single-row evaluation of dense_node.
Matrix dense_forward(const Matrix& x, const DenseLayer& layer);
/// Single-row evaluation of dense_skip_node. h_prev is 1×N, W must be out×2N.
Matrix dense_skip_forward(const Matrix& h_prev, double observer_out, const DenseLayer& layer);

/// Mean of squared componentwise differences.
double mse_loss(const Matrix& pred, const Matrix& target);

}  // namespace holonet
