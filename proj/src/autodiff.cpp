#include "holonet/autodiff.hpp"

#include "holonet/error.hpp"
#include "holonet/kernels.hpp"
#include "holonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <malloc.h>

namespace holonet::ad {

namespace {

// Every training step builds a fresh graph whose buffers can be several MB.
// Keeping freed blocks on the heap instead of returning them with munmap
// removes most of the page-fault cost of that churn.
const bool kHeapTuned = [] {
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    return true;
}();

using kernels::Transpose;

std::string node_label(const Node& n) {
    std::string s = "node " + std::to_string(n.id) + " (" + to_string(n.kind);
    if (!n.name.empty()) s += " '" + n.name + "'";
    return s + ")";
}

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double clamp_probability(double p) {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

}  // namespace

std::string to_string(const NodeKind& kind) {
    switch (kind.op) {
        case Op::Parameter: return "Parameter";
        case Op::Input: return "Input";
        case Op::MatMul: return kind.transpose_rhs ? "MatMulT" : "MatMul";
        case Op::Add: return "Add";
        case Op::TileRows: return "TileRows";
        case Op::ConcatColumns: return "ConcatColumns";
        case Op::BroadcastScalarToRow: return "BroadcastScalarToRow";
        case Op::Activation:
            return "ElementwiseActivation(" + std::string(holonet::to_string(kind.activation)) + ")";
        case Op::Mse: return "Mse";
        case Op::SumScalar: return "SumScalar";
        case Op::EmbeddingLookup: return "EmbeddingLookup";
        case Op::GaussianReparam: return "GaussianReparam";
        case Op::LogVarReparam: return "LogVarReparam";
        case Op::BernoulliNll: return "BernoulliNll";
        case Op::KlStdNormal: return "KlStdNormal";
        case Op::Scale: return "Scale(" + std::to_string(kind.constant) + ")";
    }
    return "?";
}

NodeId Graph::push(NodeKind kind, std::vector<NodeId> inputs, std::size_t rows,
                   std::size_t cols) {
    Node n;
    n.id = nodes_.size();
    n.kind = kind;
    n.inputs = std::move(inputs);
    n.rows = rows;
    n.cols = cols;
    nodes_.push_back(std::move(n));
    bound_.emplace_back();
    evaluated_ = false;
    return nodes_.back().id;
}

const Node& Graph::checked(NodeId id) const {
    if (id >= nodes_.size()) throw ShapeError("unknown node id " + std::to_string(id));
    return nodes_[id];
}

NodeId Graph::parameter(const Matrix& storage, std::string name) {
    const NodeId id = push(NodeKind::of(Op::Parameter), {}, storage.rows(), storage.cols());
    nodes_[id].storage = &storage;
    nodes_[id].name = std::move(name);
    return id;
}

NodeId Graph::input(std::size_t rows, std::size_t cols, std::string name) {
    const NodeId id = push(NodeKind::of(Op::Input), {}, rows, cols);
    nodes_[id].name = std::move(name);
    return id;
}

NodeId Graph::constant(Matrix value, std::string name) {
    const NodeId id = input(value.rows(), value.cols(), std::move(name));
    bound_[id] = std::move(value);
    return id;
}

NodeId Graph::matmul(NodeId a, NodeId b, bool transpose_rhs) {
    const Node& na = checked(a);
    const Node& nb = checked(b);
    const std::size_t inner = transpose_rhs ? nb.cols : nb.rows;
    if (na.cols != inner) {
        throw ShapeError("MatMul operands " + shape_string(na.rows, na.cols) + " and " +
                         shape_string(nb.rows, nb.cols) + (transpose_rhs ? "^T" : "") +
                         " do not align");
    }
    NodeKind kind = NodeKind::of(Op::MatMul);
    kind.transpose_rhs = transpose_rhs;
    return push(kind, {a, b}, na.rows, transpose_rhs ? nb.rows : nb.cols);
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Node& na = checked(a);
    const Node& nb = checked(b);
    if (na.rows != nb.rows || na.cols != nb.cols) {
        throw ShapeError("Add operands " + shape_string(na.rows, na.cols) + " and " +
                         shape_string(nb.rows, nb.cols) + " differ");
    }
    return push(NodeKind::of(Op::Add), {a, b}, na.rows, na.cols);
}

NodeId Graph::tile_rows(NodeId row, std::size_t rows) {
    const Node& n = checked(row);
    if (n.rows != 1) throw ShapeError("TileRows expects a row vector, got " + shape_string(n.rows, n.cols));
    return push(NodeKind::of(Op::TileRows), {row}, rows, n.cols);
}

NodeId Graph::concat_columns(NodeId a, NodeId b) {
    const Node& na = checked(a);
    const Node& nb = checked(b);
    if (na.rows != nb.rows) {
        throw ShapeError("ConcatColumns row counts differ: " + std::to_string(na.rows) + " vs " +
                         std::to_string(nb.rows));
    }
    return push(NodeKind::of(Op::ConcatColumns), {a, b}, na.rows, na.cols + nb.cols);
}

NodeId Graph::broadcast_scalar_to_row(NodeId scalar, std::size_t width) {
    const Node& n = checked(scalar);
    if (n.cols != 1) {
        throw ShapeError("BroadcastScalarToRow expects one column, got " + shape_string(n.rows, n.cols));
    }
    return push(NodeKind::of(Op::BroadcastScalarToRow), {scalar}, n.rows, width);
}

NodeId Graph::activation(NodeId x, ActivationKind kind) {
    const Node& n = checked(x);
    return push(NodeKind::activation_of(kind), {x}, n.rows, n.cols);
}

NodeId Graph::mse(NodeId pred, NodeId target) {
    const Node& np = checked(pred);
    const Node& nt = checked(target);
    if (np.rows != nt.rows || np.cols != nt.cols) {
        throw ShapeError("Mse prediction " + shape_string(np.rows, np.cols) + " vs target " +
                         shape_string(nt.rows, nt.cols));
    }
    return push(NodeKind::of(Op::Mse), {pred, target}, 1, 1);
}

NodeId Graph::sum(NodeId x) {
    checked(x);
    return push(NodeKind::of(Op::SumScalar), {x}, 1, 1);
}

NodeId Graph::scale(NodeId x, double factor) {
    const Node& n = checked(x);
    return push(NodeKind::scale_by(factor), {x}, n.rows, n.cols);
}

NodeId Graph::embedding_lookup(NodeId table, std::vector<std::size_t> indices, std::size_t slots) {
    const Node& nt = checked(table);
    if (slots == 0 || indices.size() % slots != 0) {
        throw ShapeError("EmbeddingLookup: " + std::to_string(indices.size()) +
                         " indices do not split into rows of " + std::to_string(slots));
    }
    for (auto i : indices) {
        if (i >= nt.rows) {
            throw ShapeError("EmbeddingLookup index " + std::to_string(i) + " outside table of " +
                             std::to_string(nt.rows) + " rows");
        }
    }
    const std::size_t rows = indices.size() / slots;
    const NodeId id = push(NodeKind::of(Op::EmbeddingLookup), {table}, rows, slots * nt.cols);
    nodes_[id].index = std::move(indices);
    return id;
}

NodeId Graph::gaussian_reparam(NodeId mu, NodeId sigma_raw, NodeId eps,
                               std::vector<std::size_t> gather) {
    const Node& nm = checked(mu);
    const Node& ns = checked(sigma_raw);
    const Node& ne = checked(eps);
    if (nm.rows != ns.rows || nm.cols != ns.cols) {
        throw ShapeError("GaussianReparam mu " + shape_string(nm.rows, nm.cols) + " vs sigma " +
                         shape_string(ns.rows, ns.cols));
    }
    if (gather.size() != ne.rows * ne.cols) {
        throw ShapeError("GaussianReparam gather has " + std::to_string(gather.size()) +
                         " entries for noise " + shape_string(ne.rows, ne.cols));
    }
    for (auto g : gather) {
        if (g >= nm.rows * nm.cols) throw ShapeError("GaussianReparam gather offset out of range");
    }
    const NodeId id = push(NodeKind::of(Op::GaussianReparam), {mu, sigma_raw, eps}, ne.rows, ne.cols);
    nodes_[id].index = std::move(gather);
    return id;
}

NodeId Graph::logvar_reparam(NodeId mu, NodeId logvar, NodeId eps) {
    const Node& nm = checked(mu);
    const Node& nl = checked(logvar);
    const Node& ne = checked(eps);
    if (nm.rows != nl.rows || nm.cols != nl.cols || nm.rows != ne.rows || nm.cols != ne.cols) {
        throw ShapeError("LogVarReparam operand shapes differ");
    }
    return push(NodeKind::of(Op::LogVarReparam), {mu, logvar, eps}, nm.rows, nm.cols);
}

NodeId Graph::bernoulli_nll(NodeId prob, NodeId target) {
    const Node& np = checked(prob);
    const Node& nt = checked(target);
    if (np.rows != nt.rows || np.cols != nt.cols) {
        throw ShapeError("BernoulliNll probability " + shape_string(np.rows, np.cols) +
                         " vs target " + shape_string(nt.rows, nt.cols));
    }
    return push(NodeKind::of(Op::BernoulliNll), {prob, target}, 1, 1);
}

NodeId Graph::kl_std_normal(NodeId mu, NodeId logvar) {
    const Node& nm = checked(mu);
    const Node& nl = checked(logvar);
    if (nm.rows != nl.rows || nm.cols != nl.cols) throw ShapeError("KlStdNormal operand shapes differ");
    return push(NodeKind::of(Op::KlStdNormal), {mu, logvar}, 1, 1);
}

const Matrix& Graph::value(NodeId id) const {
    const Node& n = checked(id);
    if (n.kind.op == Op::Parameter) return *n.storage;
    if (n.kind.op == Op::Input) return bound_[id];
    return n.value;
}

const Matrix& Graph::grad(NodeId id) const { return checked(id).grad; }

void Graph::forward(const Bindings& bindings) {
    for (const auto& [id, m] : bindings) {
        const Node& n = checked(id);
        if (n.kind.op != Op::Input) throw ShapeError(node_label(n) + " is not an input");
        bound_[id] = m;
    }
    for (auto& n : nodes_) {
        if (n.kind.op == Op::Input) {
            const Matrix& b = bound_[n.id];
            if (b.rows() == 0 && b.cols() == 0 && n.rows * n.cols != 0) {
                throw ShapeError(node_label(n) + " has no binding");
            }
            if (b.rows() != n.rows || b.cols() != n.cols) {
                throw ShapeError(node_label(n) + " expects " + shape_string(n.rows, n.cols) +
                                 ", bound " + shape_string(b));
            }
            continue;
        }
        if (n.kind.op == Op::Parameter) {
            if (n.storage->rows() != n.rows || n.storage->cols() != n.cols) {
                throw ShapeError(node_label(n) + " storage changed shape to " +
                                 shape_string(*n.storage));
            }
            continue;
        }
        evaluate(n);
    }
    evaluated_ = true;
}

void Graph::evaluate(Node& n) {
    auto in = [&](std::size_t k) -> const Matrix& { return value(n.inputs[k]); };
    if (n.value.rows() != n.rows || n.value.cols() != n.cols) n.value = Matrix(n.rows, n.cols);
    Matrix& out = n.value;

    switch (n.kind.op) {
        case Op::Parameter:
        case Op::Input: break;
        case Op::MatMul:
            kernels::gemm(Transpose::No, n.kind.transpose_rhs ? Transpose::Yes : Transpose::No,
                          in(0), in(1), out, false);
            break;
        case Op::Add: {
            const Matrix& a = in(0);
            const Matrix& b = in(1);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
            break;
        }
        case Op::TileRows: {
            const Matrix& r = in(0);
            for (std::size_t i = 0; i < n.rows; ++i) {
                std::copy(r.data(), r.data() + n.cols, out.data() + i * n.cols);
            }
            break;
        }
        case Op::ConcatColumns: {
            const Matrix& a = in(0);
            const Matrix& b = in(1);
            for (std::size_t i = 0; i < n.rows; ++i) {
                std::copy(a.data() + i * a.cols(), a.data() + (i + 1) * a.cols(), out.data() + i * n.cols);
                std::copy(b.data() + i * b.cols(), b.data() + (i + 1) * b.cols(),
                          out.data() + i * n.cols + a.cols());
            }
            break;
        }
        case Op::BroadcastScalarToRow: {
            const Matrix& s = in(0);
            for (std::size_t i = 0; i < n.rows; ++i) {
                std::fill(out.data() + i * n.cols, out.data() + (i + 1) * n.cols, s[i]);
            }
            break;
        }
        case Op::Activation:
            kernels::activation_forward(n.kind.activation, in(0).values(), out.values());
            break;
        case Op::Mse: {
            const Matrix& p = in(0);
            const Matrix& t = in(1);
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double d = p[i] - t[i];
                acc += d * d;
            }
            out[0] = p.size() == 0 ? 0.0 : acc / static_cast<double>(p.size());
            break;
        }
        case Op::SumScalar: {
            double acc = 0.0;
            for (double v : in(0).values()) acc += v;
            out[0] = acc;
            break;
        }
        case Op::Scale: {
            const Matrix& x = in(0);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = n.kind.constant * x[i];
            break;
        }
        case Op::EmbeddingLookup: {
            const Matrix& table = in(0);
            const std::size_t e = table.cols();
            for (std::size_t s = 0; s < n.index.size(); ++s) {
                const double* src = table.data() + n.index[s] * e;
                std::copy(src, src + e, out.data() + s * e);
            }
            break;
        }
        case Op::GaussianReparam: {
            const Matrix& mu = in(0);
            const Matrix& raw = in(1);
            const Matrix& eps = in(2);
            for (std::size_t i = 0; i < out.size(); ++i) {
                const std::size_t g = n.index[i];
                out[i] = mu[g] + (std::abs(raw[g]) + kSigmaFloor) * eps[i];
            }
            break;
        }
        case Op::LogVarReparam: {
            const Matrix& mu = in(0);
            const Matrix& lv = in(1);
            const Matrix& eps = in(2);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = mu[i] + std::exp(0.5 * lv[i]) * eps[i];
            break;
        }
        case Op::BernoulliNll: {
            const Matrix& p = in(0);
            const Matrix& t = in(1);
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double q = clamp_probability(p[i]);
                acc -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
            }
            out[0] = acc;
            break;
        }
        case Op::KlStdNormal: {
            const Matrix& mu = in(0);
            const Matrix& lv = in(1);
            double acc = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                acc += 0.5 * (mu[i] * mu[i] + std::exp(lv[i]) - 1.0 - lv[i]);
            }
            out[0] = acc;
            break;
        }
    }
}

void Graph::backward(NodeId loss) {
    const Node& n = checked(loss);
    if (n.rows != 1 || n.cols != 1) {
        throw ShapeError("loss " + node_label(n) + " is " + shape_string(n.rows, n.cols) +
                         ", expected a scalar");
    }
    backward_with_seed(loss, Matrix(1, 1, 1.0));
}

void Graph::backward_with_seed(NodeId output, const Matrix& seed) {
    const Node& out = checked(output);
    if (!evaluated_) throw ShapeError("backward called before forward");
    if (seed.rows() != out.rows || seed.cols() != out.cols) {
        throw ShapeError("seed gradient " + shape_string(seed) + " does not match " + node_label(out));
    }
    for (auto& n : nodes_) {
        if (n.grad.rows() != n.rows || n.grad.cols() != n.cols) n.grad = Matrix(n.rows, n.cols);
        else n.grad.fill(0.0);
    }
    nodes_[output].grad = seed;
    for (std::size_t k = output + 1; k-- > 0;) propagate(nodes_[k]);
}

void Graph::propagate(const Node& n) {
    const Matrix& g = n.grad;
    auto in = [&](std::size_t k) -> const Matrix& { return value(n.inputs[k]); };
    auto gin = [&](std::size_t k) -> Matrix& { return nodes_[n.inputs[k]].grad; };

    switch (n.kind.op) {
        case Op::Parameter:
        case Op::Input: break;
        case Op::MatMul: {
            // C = A·B:  dA += dC·Bᵀ, dB += Aᵀ·dC
            // C = A·Bᵀ: dA += dC·B,  dB += dCᵀ·A
            if (n.kind.transpose_rhs) {
                kernels::gemm(Transpose::No, Transpose::No, g, in(1), gin(0), true);
                kernels::gemm(Transpose::Yes, Transpose::No, g, in(0), gin(1), true);
            } else {
                kernels::gemm(Transpose::No, Transpose::Yes, g, in(1), gin(0), true);
                kernels::gemm(Transpose::Yes, Transpose::No, in(0), g, gin(1), true);
            }
            break;
        }
        case Op::Add:
            kernels::axpy(1.0, g.values(), gin(0).values());
            kernels::axpy(1.0, g.values(), gin(1).values());
            break;
        case Op::TileRows: {
            Matrix& gr = gin(0);
            for (std::size_t i = 0; i < n.rows; ++i) {
                for (std::size_t j = 0; j < n.cols; ++j) gr[j] += g(i, j);
            }
            break;
        }
        case Op::ConcatColumns: {
            Matrix& ga = gin(0);
            Matrix& gb = gin(1);
            const std::size_t ca = ga.cols();
            for (std::size_t i = 0; i < n.rows; ++i) {
                for (std::size_t j = 0; j < ca; ++j) ga(i, j) += g(i, j);
                for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) += g(i, ca + j);
            }
            break;
        }
        case Op::BroadcastScalarToRow: {
            Matrix& gs = gin(0);
            for (std::size_t i = 0; i < n.rows; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n.cols; ++j) acc += g(i, j);
                gs[i] += acc;
            }
            break;
        }
        case Op::Activation:
            kernels::activation_backward(n.kind.activation, in(0).values(), g.values(), gin(0).values());
            break;
        case Op::Mse: {
            const Matrix& p = in(0);
            const Matrix& t = in(1);
            if (p.size() == 0) break;
            const double k = 2.0 * g[0] / static_cast<double>(p.size());
            Matrix& gp = gin(0);
            Matrix& gt = gin(1);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double d = k * (p[i] - t[i]);
                gp[i] += d;
                gt[i] -= d;
            }
            break;
        }
        case Op::SumScalar: {
            Matrix& gx = gin(0);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
            break;
        }
        case Op::Scale:
            kernels::axpy(n.kind.constant, g.values(), gin(0).values());
            break;
        case Op::EmbeddingLookup: {
            Matrix& gt = gin(0);
            const std::size_t e = gt.cols();
            for (std::size_t s = 0; s < n.index.size(); ++s) {
                double* dst = gt.data() + n.index[s] * e;
                const double* src = g.data() + s * e;
                for (std::size_t j = 0; j < e; ++j) dst[j] += src[j];
            }
            break;
        }
        case Op::GaussianReparam: {
            const Matrix& raw = in(1);
            const Matrix& eps = in(2);
            Matrix& gmu = gin(0);
            Matrix& graw = gin(1);
            Matrix& geps = gin(2);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const std::size_t k = n.index[i];
                gmu[k] += g[i];
                graw[k] += g[i] * eps[i] * sign_of(raw[k]);
                geps[i] += g[i] * (std::abs(raw[k]) + kSigmaFloor);
            }
            break;
        }
        case Op::LogVarReparam: {
            const Matrix& lv = in(1);
            const Matrix& eps = in(2);
            Matrix& gmu = gin(0);
            Matrix& glv = gin(1);
            Matrix& geps = gin(2);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double sd = std::exp(0.5 * lv[i]);
                gmu[i] += g[i];
                glv[i] += g[i] * eps[i] * 0.5 * sd;
                geps[i] += g[i] * sd;
            }
            break;
        }
        case Op::BernoulliNll: {
            const Matrix& p = in(0);
            const Matrix& t = in(1);
            Matrix& gp = gin(0);
            Matrix& gt = gin(1);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double q = clamp_probability(p[i]);
                if (q == p[i]) gp[i] += g[0] * (q - t[i]) / (q * (1.0 - q));
                gt[i] -= g[0] * (std::log(q) - std::log(1.0 - q));
            }
            break;
        }
        case Op::KlStdNormal: {
            const Matrix& mu = in(0);
            const Matrix& lv = in(1);
            Matrix& gmu = gin(0);
            Matrix& glv = gin(1);
            for (std::size_t i = 0; i < mu.size(); ++i) {
                gmu[i] += g[0] * mu[i];
                glv[i] += g[0] * 0.5 * (std::exp(lv[i]) - 1.0);
            }
            break;
        }
    }
}

std::map<NodeId, const Matrix*> Graph::parameter_gradients() const {
    std::map<NodeId, const Matrix*> out;
    for (const auto& n : nodes_) {
        if (n.kind.op == Op::Parameter) out.emplace(n.id, &n.grad);
    }
    return out;
}

GradCheckResult grad_check(const GraphBuilder& build, std::vector<Matrix> point, double epsilon,
                           std::uint64_t weight_seed) {
    GradCheckResult result;
    Graph graph;
    std::vector<NodeId> ids;
    ids.reserve(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) {
        ids.push_back(graph.parameter(point[k], "x" + std::to_string(k)));
    }
    const NodeId out = build(graph, ids);
    graph.forward();

    Rng rng(weight_seed);
    const Matrix& first = graph.value(out);
    Matrix weights(first.rows(), first.cols());
    for (auto& w : weights.values()) w = rng.uniform(-1.0, 1.0);

    auto objective = [&]() {
        graph.forward();
        const Matrix& y = graph.value(out);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += weights[i] * y[i];
        return acc;
    };

    objective();
    graph.backward_with_seed(out, weights);
    std::vector<Matrix> analytic;
    for (auto id : ids) analytic.push_back(graph.grad(id));

    for (std::size_t k = 0; k < point.size(); ++k) {
        for (std::size_t i = 0; i < point[k].size(); ++i) {
            const double saved = point[k][i];
            point[k][i] = saved + epsilon;
            const double up = objective();
            point[k][i] = saved - epsilon;
            const double down = objective();
            point[k][i] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[k][i];
            const std::string where = "input " + std::to_string(k) + ", element " + std::to_string(i);
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                result.finite = false;
                result.location = where;
                result.max_rel_error = std::numeric_limits<double>::infinity();
                return result;
            }
            const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
            if (err > result.max_rel_error) {
                result.max_rel_error = err;
                result.location = where;
            }
        }
    }
    return result;
}

GradCheckResult grad_check(const NodeKind& kind, std::vector<Matrix> point, double epsilon) {
    auto need = [&](std::size_t n) {
        if (point.size() != n) {
            throw ShapeError(to_string(kind) + " grad check needs " + std::to_string(n) + " operands");
        }
    };
    GraphBuilder build;
    switch (kind.op) {
        case Op::Parameter:
        case Op::Input:
            need(1);
            build = [](Graph&, std::span<const NodeId> x) { return x[0]; };
            break;
        case Op::MatMul:
            need(2);
            build = [t = kind.transpose_rhs](Graph& g, std::span<const NodeId> x) {
                return g.matmul(x[0], x[1], t);
            };
            break;
        case Op::Add:
            need(2);
            build = [](Graph& g, std::span<const NodeId> x) { return g.add(x[0], x[1]); };
            break;
        case Op::TileRows:
            need(1);
            build = [](Graph& g, std::span<const NodeId> x) { return g.tile_rows(x[0], 3); };
            break;
        case Op::ConcatColumns:
            need(2);
            build = [](Graph& g, std::span<const NodeId> x) { return g.concat_columns(x[0], x[1]); };
            break;
        case Op::BroadcastScalarToRow:
            need(1);
            build = [](Graph& g, std::span<const NodeId> x) { return g.broadcast_scalar_to_row(x[0], 4); };
            break;
        case Op::Activation:
            need(1);
            build = [a = kind.activation](Graph& g, std::span<const NodeId> x) {
                return g.activation(x[0], a);
            };
            break;
        case Op::Mse:
            need(2);
            build = [](Graph& g, std::span<const NodeId> x) { return g.mse(x[0], x[1]); };
            break;
        case Op::SumScalar:
            need(1);
            build = [](Graph& g, std::span<const NodeId> x) { return g.sum(x[0]); };
            break;
        case Op::Scale:
            need(1);
            build = [c = kind.constant](Graph& g, std::span<const NodeId> x) { return g.scale(x[0], c); };
            break;
        case Op::EmbeddingLookup: {
            need(1);
            const std::size_t vocab = point[0].rows();
            build = [vocab](Graph& g, std::span<const NodeId> x) {
                std::vector<std::size_t> idx;
                for (std::size_t i = 0; i < 6; ++i) idx.push_back((i * 5 + 1) % vocab);
                return g.embedding_lookup(x[0], idx, 3);
            };
            break;
        }
        case Op::GaussianReparam: {
            need(3);
            const std::size_t params = point[0].size();
            const std::size_t noise = point[2].size();
            build = [params, noise](Graph& g, std::span<const NodeId> x) {
                std::vector<std::size_t> gather(noise);
                for (std::size_t i = 0; i < noise; ++i) gather[i] = (i * 7 + 3) % params;
                return g.gaussian_reparam(x[0], x[1], x[2], gather);
            };
            break;
        }
        case Op::LogVarReparam:
            need(3);
            build = [](Graph& g, std::span<const NodeId> x) { return g.logvar_reparam(x[0], x[1], x[2]); };
            break;
        case Op::BernoulliNll:
            need(2);
            build = [](Graph& g, std::span<const NodeId> x) { return g.bernoulli_nll(x[0], x[1]); };
            break;
        case Op::KlStdNormal:
            need(2);
            build = [](Graph& g, std::span<const NodeId> x) { return g.kl_std_normal(x[0], x[1]); };
            break;
    }
    return grad_check(build, std::move(point), epsilon);
}

}  // namespace holonet::ad
