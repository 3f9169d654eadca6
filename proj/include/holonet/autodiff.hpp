#pragma once

// Define-by-run reverse-mode differentiation over dense row-major matrices.
//
// A Graph is built once per batch. Node ids are assigned in creation order,
// so every node's inputs have smaller ids and creation order is a valid
// topological order. Rows index examples in a batch throughout.
//
// Randomness never enters the graph: stochastic nodes take their noise as an
// Input the caller has already drawn.

#include "holonet/activation.hpp"
#include "holonet/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace holonet::ad {

using NodeId = std::size_t;

enum class Op {
    Parameter,
    Input,
    MatMul,
    Add,
    TileRows,
    ConcatColumns,
    BroadcastScalarToRow,
    Activation,
    Mse,
    SumScalar,
    EmbeddingLookup,
    GaussianReparam,
    LogVarReparam,
    BernoulliNll,
    KlStdNormal,
    Scale,
};

struct NodeKind {
    Op op = Op::Input;
    ActivationKind activation = ActivationKind::Identity;  // Op::Activation
    double constant = 1.0;                                 // Op::Scale
    bool transpose_rhs = false;                            // Op::MatMul

    static NodeKind of(Op op) { return NodeKind{op}; }
    static NodeKind activation_of(ActivationKind kind) {
        return NodeKind{Op::Activation, kind};
    }
    static NodeKind scale_by(double c) { return NodeKind{Op::Scale, ActivationKind::Identity, c}; }
};

std::string to_string(const NodeKind& kind);

/// Effective standard deviation for a raw prior scale parameter.
inline constexpr double kSigmaFloor = 1e-6;

/// Clamp applied to Bernoulli probabilities before taking logs.
inline constexpr double kProbabilityClamp = 1e-7;

struct Node {
    NodeId id = 0;
    NodeKind kind;
    std::vector<NodeId> inputs;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string name;
    /// Gather indices for EmbeddingLookup (table rows) and GaussianReparam
    /// (flat offsets into the parameter matrices), one per output element or slot.
    std::vector<std::size_t> index;
    /// Parameter storage, owned by the model; read at forward time.
    const Matrix* storage = nullptr;
    Matrix value;
    Matrix grad;
};

using Bindings = std::map<NodeId, Matrix>;

class Graph {
public:
    /// Trainable array owned by the caller. Must outlive the graph.
    NodeId parameter(const Matrix& storage, std::string name);
    /// Placeholder bound at forward() time.
    NodeId input(std::size_t rows, std::size_t cols, std::string name = {});
    /// Input bound immediately; forward() bindings may still override it.
    NodeId constant(Matrix value, std::string name = {});

    /// a·b, or a·bᵀ when transpose_rhs is set (weights stored out×in).
    NodeId matmul(NodeId a, NodeId b, bool transpose_rhs = false);
    NodeId add(NodeId a, NodeId b);
    /// Repeats a 1×n row vector to rows×n.
    NodeId tile_rows(NodeId row, std::size_t rows);
    NodeId concat_columns(NodeId a, NodeId b);
    /// Expands an m×1 column to m×width (one scalar per example, repeated).
    NodeId broadcast_scalar_to_row(NodeId scalar, std::size_t width);
    NodeId activation(NodeId x, ActivationKind kind);
    /// Mean of squared differences over all elements; 1×1.
    NodeId mse(NodeId pred, NodeId target);
    NodeId sum(NodeId x);
    NodeId scale(NodeId x, double factor);
    /// table: V×E; indices: per example, `slots` table-row ids. Output m×(slots·E).
    NodeId embedding_lookup(NodeId table, std::vector<std::size_t> indices, std::size_t slots);
    /// out[i] = mu[idx[i]] + (|sigma_raw[idx[i]]| + 1e-6)·eps[i], with idx
    /// giving flat offsets into mu/sigma_raw for each element of eps.
    NodeId gaussian_reparam(NodeId mu, NodeId sigma_raw, NodeId eps,
                            std::vector<std::size_t> gather);
    /// z = mu + exp(logvar/2)·eps
    NodeId logvar_reparam(NodeId mu, NodeId logvar, NodeId eps);
    /// Σ −[t·ln p + (1−t)·ln(1−p)], p clamped to [1e-7, 1−1e-7]; 1×1.
    NodeId bernoulli_nll(NodeId prob, NodeId target);
    /// Σ ½(μ² + σ² − 1 − ln σ²) with σ² = exp(logvar); 1×1.
    NodeId kl_std_normal(NodeId mu, NodeId logvar);

    /// Evaluates every node in id order.
    void forward(const Bindings& bindings = {});
    /// Fills grad for every node with d(loss)/d(node). The loss must be 1×1.
    void backward(NodeId loss);
    /// Same, seeding the output node with an arbitrary upstream gradient.
    void backward_with_seed(NodeId output, const Matrix& seed);

    const Matrix& value(NodeId id) const;
    const Matrix& grad(NodeId id) const;
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Parameter node gradients keyed by node id (valid after backward).
    std::map<NodeId, const Matrix*> parameter_gradients() const;

private:
    NodeId push(NodeKind kind, std::vector<NodeId> inputs, std::size_t rows, std::size_t cols);
    const Node& checked(NodeId id) const;
    void evaluate(Node& node);
    void propagate(const Node& node);

    std::vector<Node> nodes_;
    std::vector<Matrix> bound_;  // per-node bound values for Input nodes
    bool evaluated_ = false;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    bool finite = true;
    /// "input i, element j" of the worst (or first non-finite) component.
    std::string location;
};

/// Builds the output of a subgraph from parameter nodes holding the sample point.
using GraphBuilder = std::function<NodeId(Graph&, std::span<const NodeId>)>;

/// Compares reverse-mode gradients with central finite differences of
/// L = Σ w⊙output (w fixed pseudo-random weights) at `point`. The error
/// per component is |analytic − numeric| / max(1, |analytic|).
GradCheckResult grad_check(const GraphBuilder& build, std::vector<Matrix> point,
                           double epsilon = 1e-5, std::uint64_t weight_seed = 17);

/// grad_check for a single node kind applied to `point` (one matrix per
/// operand). Index-carrying kinds use a fixed gather pattern.
GradCheckResult grad_check(const NodeKind& kind, std::vector<Matrix> point,
                           double epsilon = 1e-5);

}  // namespace holonet::ad
