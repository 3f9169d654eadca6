#include "holonet/layers.hpp"

#include "holonet/error.hpp"

#include <cmath>

namespace holonet {

std::string_view to_string(BiasPlacement p) {
    return p == BiasPlacement::PostActivation ? "post_activation" : "pre_activation";
}

BiasPlacement bias_placement_from_string(std::string_view name) {
    if (name == "post_activation") return BiasPlacement::PostActivation;
    if (name == "pre_activation") return BiasPlacement::PreActivation;
    throw ConfigError("unknown bias placement '" + std::string(name) + "'");
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in == 0 || fan_out == 0) {
        throw ConfigError("glorot_init needs positive fan-in and fan-out, got " +
                          std::to_string(fan_in) + " and " + std::to_string(fan_out));
    }
    const double limit = glorot_limit(fan_in, fan_out);
    Matrix w(fan_out, fan_in);
    for (auto& v : w.values()) v = rng.uniform(-limit, limit);
    return w;
}

DenseLayer make_dense(std::size_t in, std::size_t out, ActivationKind activation,
                      BiasPlacement placement, Rng& rng) {
    DenseLayer layer;
    layer.weight = glorot_init(in, out, rng);
    layer.bias = Matrix(1, out);
    layer.activation = activation;
    layer.bias_placement = placement;
    return layer;
}

ad::NodeId ParamNodes::operator()(const Matrix& storage, const std::string& name) {
    if (auto it = ids_.find(&storage); it != ids_.end()) return it->second;
    const ad::NodeId id = graph_.parameter(storage, name);
    ids_.emplace(&storage, id);
    return id;
}

namespace {

ad::NodeId affine_and_activate(ParamNodes& params, const DenseLayer& layer, const std::string& name,
                               ad::NodeId x) {
    ad::Graph& g = params.graph();
    const std::size_t rows = g.node(x).rows;
    const ad::NodeId w = params(layer.weight, name + ".W");
    const ad::NodeId b = params(layer.bias, name + ".b");
    const ad::NodeId z = g.matmul(x, w, true);
    const ad::NodeId bias = g.tile_rows(b, rows);
    if (layer.bias_placement == BiasPlacement::PreActivation) {
        return g.activation(g.add(z, bias), layer.activation);
    }
    return g.add(g.activation(z, layer.activation), bias);
}

Matrix evaluate_single(const std::function<ad::NodeId(ParamNodes&)>& build) {
    ad::Graph g;
    ParamNodes params(g);
    const ad::NodeId out = build(params);
    g.forward();
    return g.value(out);
}

}  // namespace

ad::NodeId dense_node(ParamNodes& params, const DenseLayer& layer, const std::string& name,
                      ad::NodeId x) {
    const auto& node = params.graph().node(x);
    if (node.cols != layer.in_dim()) {
        throw ShapeError("layer '" + name + "' expects width " + std::to_string(layer.in_dim()) +
                         ", got " + std::to_string(node.cols));
    }
    return affine_and_activate(params, layer, name, x);
}

ad::NodeId dense_skip_node(ParamNodes& params, const DenseLayer& layer, const std::string& name,
                           ad::NodeId h_prev, ad::NodeId observer) {
    ad::Graph& g = params.graph();
    const std::size_t width = g.node(h_prev).cols;
    if (layer.in_dim() != 2 * width) {
        throw ShapeError("skip layer '" + name + "' has W of " + shape_string(layer.weight) +
                         " but previous width " + std::to_string(width) + " needs " +
                         std::to_string(2 * width) + " columns");
    }
    const ad::NodeId skip = g.broadcast_scalar_to_row(observer, width);
    return affine_and_activate(params, layer, name, g.concat_columns(h_prev, skip));
}

Matrix dense_forward(const Matrix& x, const DenseLayer& layer) {
    return evaluate_single([&](ParamNodes& p) {
        return dense_node(p, layer, "dense", p.graph().constant(x));
    });
}

Matrix dense_skip_forward(const Matrix& h_prev, double observer_out, const DenseLayer& layer) {
    if (h_prev.rows() != 1) throw ShapeError("dense_skip_forward expects a single row");
    return evaluate_single([&](ParamNodes& p) {
        ad::Graph& g = p.graph();
        return dense_skip_node(p, layer, "skip", g.constant(h_prev),
                               g.constant(Matrix(1, 1, observer_out)));
    });
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target)) {
        throw ShapeError("mse_loss shapes differ: " + shape_string(pred) + " vs " + shape_string(target));
    }
    if (pred.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

}  // namespace holonet
