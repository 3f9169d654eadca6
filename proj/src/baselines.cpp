#include "holonet/baselines.hpp"

#include "holonet/adagrad.hpp"
#include "holonet/batching.hpp"
#include "holonet/error.hpp"

#include <cmath>

namespace holonet {

void AeConfig::validate() const {
    if (input_dim == 0 || width == 0 || bottleneck == 0) {
        throw ConfigError("autoencoder widths must be positive");
    }
    // Low-dimensional inputs (the 2-D crescents) keep a bottleneck equal to
    // the input width; above that the code must be strictly narrower.
    if (input_dim > 2 && bottleneck >= input_dim) {
        throw ConfigError("bottleneck (" + std::to_string(bottleneck) +
                          ") must be narrower than the input (" + std::to_string(input_dim) + ")");
    }
    if (bottleneck > input_dim) throw ConfigError("bottleneck wider than the input");
    if (noise_std < 0) throw ConfigError("noise_std must be non-negative");
}

nlohmann::json to_json(const AeConfig& c) {
    return {{"input_dim", c.input_dim},   {"width", c.width},
            {"depth", c.depth},           {"bottleneck", c.bottleneck},
            {"noise_std", c.noise_std},   {"output_activation", to_string(c.output_activation)}};
}

AeConfig ae_config_from_json(const nlohmann::json& j) {
    AeConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.width = j.value("width", c.width);
    c.depth = j.value("depth", c.depth);
    c.bottleneck = j.value("bottleneck", c.bottleneck);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.output_activation = activation_from_string(j.value("output_activation", std::string("identity")));
    return c;
}

std::vector<ParamRef> AeModel::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < encoder.size(); ++i) {
        out.push_back({"encoder." + std::to_string(i) + ".W", &encoder[i].weight});
        out.push_back({"encoder." + std::to_string(i) + ".b", &encoder[i].bias});
    }
    for (std::size_t i = 0; i < decoder.size(); ++i) {
        out.push_back({"decoder." + std::to_string(i) + ".W", &decoder[i].weight});
        out.push_back({"decoder." + std::to_string(i) + ".b", &decoder[i].bias});
    }
    return out;
}

AeModel make_ae(const AeConfig& config, Rng& rng) {
    config.validate();
    AeModel m;
    m.config = config;
    constexpr auto pre = BiasPlacement::PreActivation;
    std::size_t in = config.input_dim;
    for (std::size_t i = 0; i < config.depth; ++i) {
        m.encoder.push_back(make_dense(in, config.width, ActivationKind::Relu, pre, rng));
        in = config.width;
    }
    m.encoder.push_back(make_dense(in, config.bottleneck, ActivationKind::Identity, pre, rng));
    in = config.bottleneck;
    for (std::size_t i = 0; i < config.depth; ++i) {
        m.decoder.push_back(make_dense(in, config.width, ActivationKind::Relu, pre, rng));
        in = config.width;
    }
    m.decoder.push_back(make_dense(in, config.input_dim, config.output_activation, pre, rng));
    return m;
}

namespace {

ad::NodeId ae_graph(ParamNodes& params, const AeModel& model, ad::NodeId x) {
    ad::NodeId h = x;
    for (std::size_t i = 0; i < model.encoder.size(); ++i) {
        h = dense_node(params, model.encoder[i], "encoder." + std::to_string(i), h);
    }
    for (std::size_t i = 0; i < model.decoder.size(); ++i) {
        h = dense_node(params, model.decoder[i], "decoder." + std::to_string(i), h);
    }
    return h;
}

Matrix add_noise(const Matrix& x, double std, Rng& rng) {
    Matrix out = x;
    if (std > 0) {
        for (auto& v : out.values()) v += std * rng.normal();
    }
    return out;
}

std::vector<const Matrix*> collect_grads(const std::vector<ParamRef>& refs, const ParamNodes& params,
                                         const ad::Graph& g) {
    std::vector<const Matrix*> grads(refs.size(), nullptr);
    for (std::size_t k = 0; k < refs.size(); ++k) {
        if (auto it = params.ids().find(refs[k].value); it != params.ids().end()) {
            grads[k] = &g.grad(it->second);
        }
    }
    return grads;
}

}  // namespace

Matrix ae_forward(const AeModel& model, const Matrix& x) {
    ad::Graph g;
    ParamNodes params(g);
    const ad::NodeId out = ae_graph(params, model, g.constant(x, "x"));
    g.forward();
    return g.value(out);
}

Matrix dae_forward(const AeModel& model, const Matrix& x, Rng& rng) {
    return ae_forward(model, add_noise(x, model.config.noise_std, rng));
}

std::vector<EpochRecord> train_ae(AeModel& model, const LabeledDataset& dataset, const TrainConfig& config,
                                  const EpochCallback& on_epoch) {
    dataset.validate();
    if (dataset.dim() != model.config.input_dim) throw ShapeError("dataset width does not match the model");
    auto refs = model.parameters();
    AdagradState opt;
    opt.learning_rate = config.learning_rate;
    Rng rng = Rng::derive(config.seed, 0xAE);
    std::vector<EpochRecord> log;
    const Stopwatch clock;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (const auto& rows : epoch_batches(dataset.size(), config.batch_size, rng)) {
            const Matrix target = dataset.inputs.gather_rows(rows);
            const Matrix input = add_noise(target, model.config.noise_std, rng);
            ad::Graph g;
            ParamNodes params(g);
            const ad::NodeId out = ae_graph(params, model, g.constant(input, "x"));
            const ad::NodeId loss = g.mse(out, g.constant(target, "target"));
            g.forward();
            const double value = g.value(loss)[0];
            if (!std::isfinite(value)) throw NumericalError("autoencoder loss is not finite at epoch " + std::to_string(epoch));
            g.backward(loss);
            adagrad_step(refs, collect_grads(refs, params, g), opt);
            loss_sum += value * static_cast<double>(rows.size());
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(dataset.size()), clock.seconds()};
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return log;
}

void VaeConfig::validate() const {
    if (input_dim == 0 || width == 0 || latent_dim == 0) throw ConfigError("VAE widths must be positive");
}

nlohmann::json to_json(const VaeConfig& c) {
    return {{"input_dim", c.input_dim}, {"width", c.width}, {"depth", c.depth}, {"latent_dim", c.latent_dim}};
}

VaeConfig vae_config_from_json(const nlohmann::json& j) {
    VaeConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.width = j.value("width", c.width);
    c.depth = j.value("depth", c.depth);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    return c;
}

std::vector<ParamRef> VaeModel::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < encoder.size(); ++i) {
        out.push_back({"encoder." + std::to_string(i) + ".W", &encoder[i].weight});
        out.push_back({"encoder." + std::to_string(i) + ".b", &encoder[i].bias});
    }
    out.push_back({"mu.W", &mu_head.weight});
    out.push_back({"mu.b", &mu_head.bias});
    out.push_back({"logvar.W", &logvar_head.weight});
    out.push_back({"logvar.b", &logvar_head.bias});
    for (std::size_t i = 0; i < decoder.size(); ++i) {
        out.push_back({"decoder." + std::to_string(i) + ".W", &decoder[i].weight});
        out.push_back({"decoder." + std::to_string(i) + ".b", &decoder[i].bias});
    }
    return out;
}

VaeModel make_vae(const VaeConfig& config, Rng& rng) {
    config.validate();
    VaeModel m;
    m.config = config;
    constexpr auto pre = BiasPlacement::PreActivation;
    std::size_t in = config.input_dim;
    for (std::size_t i = 0; i < config.depth; ++i) {
        m.encoder.push_back(make_dense(in, config.width, ActivationKind::Relu, pre, rng));
        in = config.width;
    }
    m.mu_head = make_dense(in, config.latent_dim, ActivationKind::Identity, pre, rng);
    m.logvar_head = make_dense(in, config.latent_dim, ActivationKind::Identity, pre, rng);
    in = config.latent_dim;
    for (std::size_t i = 0; i < config.depth; ++i) {
        m.decoder.push_back(make_dense(in, config.width, ActivationKind::Relu, pre, rng));
        in = config.width;
    }
    m.decoder.push_back(make_dense(in, config.input_dim, ActivationKind::Sigmoid, pre, rng));
    return m;
}

namespace {

void check_unit_interval(const Matrix& x) {
    for (double v : x.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DataError("Bernoulli likelihood needs inputs in [0, 1], found " + std::to_string(v));
        }
    }
}

Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& v : m.values()) v = rng.normal();
    return m;
}

}  // namespace

VaeNodes build_vae_graph(ParamNodes& params, const VaeModel& model, const Matrix& x, const Matrix& eps) {
    ad::Graph& g = params.graph();
    ad::NodeId h = g.constant(x, "x");
    for (std::size_t i = 0; i < model.encoder.size(); ++i) {
        h = dense_node(params, model.encoder[i], "encoder." + std::to_string(i), h);
    }
    VaeNodes n{};
    n.mu = dense_node(params, model.mu_head, "mu", h);
    n.logvar = dense_node(params, model.logvar_head, "logvar", h);
    n.z = g.logvar_reparam(n.mu, n.logvar, g.constant(eps, "eps"));
    h = n.z;
    for (std::size_t i = 0; i < model.decoder.size(); ++i) {
        h = dense_node(params, model.decoder[i], "decoder." + std::to_string(i), h);
    }
    n.reconstruction = h;
    n.nll = g.bernoulli_nll(n.reconstruction, g.constant(x, "target"));
    n.kl = g.kl_std_normal(n.mu, n.logvar);
    n.loss = g.scale(g.add(n.nll, n.kl), 1.0 / static_cast<double>(std::max<std::size_t>(1, x.rows())));
    return n;
}

VaeForward vae_forward_with_noise(const VaeModel& model, const Matrix& x, const Matrix& eps) {
    check_unit_interval(x);
    if (eps.rows() != x.rows() || eps.cols() != model.config.latent_dim) {
        throw ShapeError("VAE noise must be " + shape_string(x.rows(), model.config.latent_dim));
    }
    ad::Graph g;
    ParamNodes params(g);
    const VaeNodes n = build_vae_graph(params, model, x, eps);
    g.forward();
    return {g.value(n.reconstruction), g.value(n.mu), g.value(n.logvar), g.value(n.z)};
}

VaeForward vae_forward(const VaeModel& model, const Matrix& x, Rng& rng) {
    return vae_forward_with_noise(model, x, standard_normal(x.rows(), model.config.latent_dim, rng));
}

ElboTerms vae_loss(const Matrix& x, const Matrix& reconstruction, const Matrix& mu, const Matrix& logvar) {
    check_unit_interval(x);
    if (!x.same_shape(reconstruction) || !mu.same_shape(logvar) || mu.rows() != x.rows()) {
        throw ShapeError("vae_loss operand shapes do not align");
    }
    ad::Graph g;
    const ad::NodeId nll = g.bernoulli_nll(g.constant(reconstruction), g.constant(x));
    const ad::NodeId kl = g.kl_std_normal(g.constant(mu), g.constant(logvar));
    g.forward();
    const double rows = static_cast<double>(std::max<std::size_t>(1, x.rows()));
    ElboTerms t;
    t.nll = g.value(nll)[0] / rows;
    t.kl = g.value(kl)[0] / rows;
    t.negative_elbo = t.nll + t.kl;
    return t;
}

std::vector<VaeEpochRecord> train_vae(VaeModel& model, const LabeledDataset& dataset,
                                      const TrainConfig& config,
                                      const std::function<void(const VaeEpochRecord&)>& on_epoch) {
    dataset.validate();
    check_unit_interval(dataset.inputs);
    if (dataset.dim() != model.config.input_dim) throw ShapeError("dataset width does not match the model");
    auto refs = model.parameters();
    AdagradState opt;
    opt.learning_rate = config.learning_rate;
    Rng rng = Rng::derive(config.seed, 0xBAE);
    std::vector<VaeEpochRecord> log;
    const Stopwatch clock;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        VaeEpochRecord rec;
        rec.epoch = epoch;
        rec.min_step_kl = std::numeric_limits<double>::infinity();
        for (const auto& rows : epoch_batches(dataset.size(), config.batch_size, rng)) {
            const Matrix x = dataset.inputs.gather_rows(rows);
            const Matrix eps = standard_normal(rows.size(), model.config.latent_dim, rng);
            ad::Graph g;
            ParamNodes params(g);
            const VaeNodes n = build_vae_graph(params, model, x, eps);
            g.forward();
            const double value = g.value(n.loss)[0];
            const double kl_mean = g.value(n.kl)[0] / static_cast<double>(rows.size());
            if (!std::isfinite(value)) throw NumericalError("VAE loss is not finite at epoch " + std::to_string(epoch));
            g.backward(n.loss);
            adagrad_step(refs, collect_grads(refs, params, g), opt);
            const double weight = static_cast<double>(rows.size()) / static_cast<double>(dataset.size());
            rec.negative_elbo += value * weight;
            rec.kl += kl_mean * weight;
            rec.min_step_kl = std::min(rec.min_step_kl, kl_mean);
        }
        rec.seconds = clock.seconds();
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return log;
}

}  // namespace holonet
