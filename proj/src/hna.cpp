#include "holonet/hna.hpp"

#include "holonet/batching.hpp"
#include "holonet/error.hpp"
#include "holonet/peptide.hpp"

#include <cmath>
#include <numeric>

namespace holonet {

std::string_view to_string(HnaMode m) { return m == HnaMode::Generative ? "hgn" : "hrn"; }

HnaMode hna_mode_from_string(std::string_view name) {
    if (name == "hgn") return HnaMode::Generative;
    if (name == "hrn") return HnaMode::Regression;
    throw ConfigError("unknown model mode '" + std::string(name) + "'");
}

ActivationKind HnaConfig::hidden_activation() const {
    return activation == ActivationKind::Sine10 ? ActivationKind::Sine : activation;
}

ActivationKind HnaConfig::backbone_output_activation() const {
    if (output_activation) return *output_activation;
    if (activation == ActivationKind::Sine || activation == ActivationKind::Sine10 ||
        activation == ActivationKind::SineNorm01) {
        return ActivationKind::SineNorm01;
    }
    return activation;
}

double HnaConfig::observer_scale() const { return activation == ActivationKind::Sine10 ? 10.0 : 1.0; }

ActivationRange HnaConfig::observer_range() const {
    const double s = observer_scale();
    return {-s, s};
}

std::size_t HnaConfig::observer_input_dim() const {
    return mode == HnaMode::Regression ? peptide_slots * embedding_dim : input_dim;
}

void HnaConfig::validate() const {
    if (width == 0 || components == 0) throw ConfigError("width and components must be positive");
    if (num_conditions == 0) throw ConfigError("at least one condition is required");
    if (backbone_depth == 0) throw ConfigError("backbone needs at least one hidden layer");
    if (output_dim == 0) throw ConfigError("output_dim must be positive");
    if (observer_input_dim() == 0) throw ConfigError("observer input width must be positive");
    if (mode == HnaMode::Regression && output_dim != 1) {
        throw ConfigError("regression mode predicts a single value (output_dim 1)");
    }
    if (sample_mode == SampleMode::IidMixtureDraws && draw_dim == 0) {
        throw ConfigError("iid_mixture_draws needs draw_dim > 0");
    }
    if (extra_noise_std < 0) throw ConfigError("extra_noise_std must be non-negative");
}

nlohmann::json to_json(const HnaConfig& c) {
    nlohmann::json j;
    j["mode"] = to_string(c.mode);
    j["input_dim"] = c.input_dim;
    j["output_dim"] = c.output_dim;
    j["num_conditions"] = c.num_conditions;
    j["width"] = c.width;
    j["observer_depth"] = c.observer_depth;
    j["backbone_depth"] = c.backbone_depth;
    j["activation"] = to_string(c.activation);
    j["output_activation"] =
        c.output_activation ? nlohmann::json(to_string(*c.output_activation)) : nlohmann::json(nullptr);
    j["hidden_bias"] = to_string(c.hidden_bias);
    j["output_bias"] = to_string(c.output_bias);
    j["components"] = c.components;
    j["sample_mode"] = to_string(c.sample_mode);
    j["draw_dim"] = c.draw_dim;
    j["extra_noise_std"] = c.extra_noise_std;
    j["embedding_dim"] = c.embedding_dim;
    j["peptide_slots"] = c.peptide_slots;
    j["freeze_pad"] = c.freeze_pad;
    j["fss_redraw_prior"] = c.fss_redraw_prior;
    return j;
}

HnaConfig hna_config_from_json(const nlohmann::json& j) {
    HnaConfig c;
    c.mode = hna_mode_from_string(j.value("mode", std::string("hgn")));
    c.input_dim = j.value("input_dim", c.input_dim);
    c.output_dim = j.value("output_dim", c.output_dim);
    c.num_conditions = j.value("num_conditions", c.num_conditions);
    c.width = j.value("width", c.width);
    c.observer_depth = j.value("observer_depth", c.observer_depth);
    c.backbone_depth = j.value("backbone_depth", c.backbone_depth);
    c.activation = activation_from_string(j.value("activation", std::string("sine")));
    if (j.contains("output_activation") && !j["output_activation"].is_null()) {
        c.output_activation = activation_from_string(j["output_activation"].get<std::string>());
    }
    c.hidden_bias = bias_placement_from_string(j.value("hidden_bias", std::string("post_activation")));
    c.output_bias = bias_placement_from_string(j.value("output_bias", std::string("pre_activation")));
    c.components = j.value("components", c.components);
    c.sample_mode = sample_mode_from_string(j.value("sample_mode", std::string("vector_per_gaussian")));
    c.draw_dim = j.value("draw_dim", c.draw_dim);
    c.extra_noise_std = j.value("extra_noise_std", c.extra_noise_std);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.peptide_slots = j.value("peptide_slots", c.peptide_slots);
    c.freeze_pad = j.value("freeze_pad", c.freeze_pad);
    c.fss_redraw_prior = j.value("fss_redraw_prior", c.fss_redraw_prior);
    return c;
}

std::vector<ParamRef> HnaModel::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < observer.size(); ++i) {
        out.push_back({"observer." + std::to_string(i) + ".W", &observer[i].weight});
        out.push_back({"observer." + std::to_string(i) + ".b", &observer[i].bias});
    }
    for (std::size_t i = 0; i < backbone.size(); ++i) {
        out.push_back({"backbone." + std::to_string(i) + ".W", &backbone[i].weight});
        out.push_back({"backbone." + std::to_string(i) + ".b", &backbone[i].bias});
    }
    out.push_back({"prior.mu", &prior.mu});
    out.push_back({"prior.sigma_raw", &prior.sigma_raw});
    if (config.mode == HnaMode::Regression) out.push_back({"embedding", &embedding});
    return out;
}

HnaModel make_hna(const HnaConfig& config, Rng& rng) {
    config.validate();
    HnaModel m;
    m.config = config;
    const ActivationKind hidden = config.hidden_activation();

    std::size_t in = config.observer_input_dim();
    for (std::size_t i = 0; i < config.observer_depth; ++i) {
        m.observer.push_back(make_dense(in, config.width, hidden, BiasPlacement::PreActivation, rng));
        in = config.width;
    }
    m.observer.push_back(make_dense(in, 1, ActivationKind::Sine, BiasPlacement::PreActivation, rng));

    std::size_t prev = config.sample_mode == SampleMode::VectorPerGaussian ? config.components
                                                                            : config.draw_dim;
    for (std::size_t i = 0; i < config.backbone_depth; ++i) {
        m.backbone.push_back(make_dense(2 * prev, config.width, hidden, config.hidden_bias, rng));
        prev = config.width;
    }
    m.backbone.push_back(make_dense(2 * prev, config.output_dim, config.backbone_output_activation(),
                                    config.output_bias, rng));

    m.prior = init_prior(config.num_conditions, config.components, rng, config.sample_mode,
                         config.draw_dim);

    if (config.mode == HnaMode::Regression) {
        m.embedding = Matrix(kVocabularySize, config.embedding_dim);
        for (auto& v : m.embedding.values()) v = rng.uniform(-1.0, 1.0);
        if (config.freeze_pad) {
            for (std::size_t j = 0; j < config.embedding_dim; ++j) m.embedding(kPadIndex, j) = 0.0;
        }
    }
    return m;
}

namespace {

void check_conditions(const HnaModel& model, std::span<const std::size_t> conditions) {
    for (auto c : conditions) {
        if (c >= model.prior.num_conditions()) {
            throw DataError("condition " + std::to_string(c) + " unknown to a model with " +
                            std::to_string(model.prior.num_conditions()) + " conditions");
        }
    }
}

ad::NodeId observer_input_node(ParamNodes& params, const HnaModel& model, const HnaBatch& batch) {
    ad::Graph& g = params.graph();
    const HnaConfig& cfg = model.config;
    if (cfg.mode == HnaMode::Generative) {
        if (batch.inputs.cols() != cfg.input_dim) {
            throw ShapeError("observer expects inputs of width " + std::to_string(cfg.input_dim) +
                             ", got " + std::to_string(batch.inputs.cols()));
        }
        return g.constant(batch.inputs, "x");
    }
    if (batch.inputs.cols() != cfg.peptide_slots) {
        throw ShapeError("regression input needs " + std::to_string(cfg.peptide_slots) +
                         " residue slots, got " + std::to_string(batch.inputs.cols()));
    }
    std::vector<std::size_t> idx;
    idx.reserve(batch.inputs.size());
    for (double v : batch.inputs.values()) {
        if (!(v >= 0) || v >= static_cast<double>(kVocabularySize) || v != std::floor(v)) {
            throw DataError("residue index " + std::to_string(v) + " outside vocabulary");
        }
        idx.push_back(static_cast<std::size_t>(v));
    }
    const ad::NodeId table = params(model.embedding, "embedding");
    return g.embedding_lookup(table, std::move(idx), cfg.peptide_slots);
}

}  // namespace

HnaNodes build_hna_graph(ParamNodes& params, const HnaModel& model, const HnaBatch& batch,
                         const PriorNoise& noise, const Matrix* extra_noise,
                         const Matrix* observer_override) {
    ad::Graph& g = params.graph();
    const std::size_t rows = batch.conditions.size();
    check_conditions(model, batch.conditions);
    if (noise.eps.rows() != rows) throw ShapeError("prior noise rows do not match the batch");

    HnaNodes nodes{};
    if (observer_override != nullptr) {
        if (observer_override->rows() != rows || observer_override->cols() != 1) {
            throw ShapeError("observer override must be " + shape_string(rows, 1));
        }
        nodes.observer = g.constant(*observer_override, "observer.override");
    } else {
        if (batch.inputs.rows() != rows) throw ShapeError("batch inputs and conditions differ in length");
        ad::NodeId h = observer_input_node(params, model, batch);
        for (std::size_t i = 0; i < model.observer.size(); ++i) {
            h = dense_node(params, model.observer[i], "observer." + std::to_string(i), h);
        }
        const double s = model.config.observer_scale();
        nodes.observer = s == 1.0 ? h : g.scale(h, s);
    }

    ad::NodeId h = prior_sample_node(params, model.prior, noise);
    if (extra_noise != nullptr) h = g.add(h, g.constant(*extra_noise, "prior.extra_noise"));
    nodes.prior_sample = h;
    for (std::size_t i = 0; i < model.backbone.size(); ++i) {
        h = dense_skip_node(params, model.backbone[i], "backbone." + std::to_string(i), h, nodes.observer);
    }
    nodes.output = h;
    return nodes;
}

Matrix observe(const HnaModel& model, const HnaBatch& batch) {
    ad::Graph g;
    ParamNodes params(g);
    ad::NodeId h = observer_input_node(params, model, batch);
    for (std::size_t i = 0; i < model.observer.size(); ++i) {
        h = dense_node(params, model.observer[i], "observer." + std::to_string(i), h);
    }
    const double s = model.config.observer_scale();
    if (s != 1.0) h = g.scale(h, s);
    g.forward();
    return g.value(h);
}

namespace {

Matrix run_forward(const HnaModel& model, const HnaBatch& batch, Rng& rng,
                   const Matrix* observer_override = nullptr) {
    const PriorNoise noise = draw_prior_noise(model.prior, batch.conditions, rng);
    ad::Graph g;
    ParamNodes params(g);
    const HnaNodes nodes = build_hna_graph(params, model, batch, noise, nullptr, observer_override);
    g.forward();
    return g.value(nodes.output);
}

}  // namespace

Matrix hgn_forward(const HnaModel& model, const Matrix& inputs, std::span<const std::size_t> conditions,
                   Rng& rng) {
    if (model.config.mode != HnaMode::Generative) throw ConfigError("hgn_forward needs a generative model");
    if (inputs.rows() != conditions.size()) throw ShapeError("one condition per input row is required");
    HnaBatch batch{inputs, {conditions.begin(), conditions.end()}};
    return run_forward(model, batch, rng);
}

Matrix hgn_forward(const HnaModel& model, std::span<const double> input, std::size_t condition,
                   Rng& rng) {
    const std::size_t conditions[] = {condition};
    return hgn_forward(model, Matrix::row(input), conditions, rng);
}

std::vector<double> fss_grid(ActivationRange range, std::size_t n_samples) {
    if (n_samples < 2) throw ConfigError("full spectrum sampling needs at least 2 samples");
    std::vector<double> v(n_samples);
    const double step = (range.hi - range.lo) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) v[i] = range.lo + step * static_cast<double>(i);
    v.back() = range.hi;
    // Mirror so the grid is exactly symmetric about the midpoint.
    for (std::size_t i = 0; i < n_samples / 2; ++i) {
        const double mid = 0.5 * (range.lo + range.hi);
        v[n_samples - 1 - i] = 2.0 * mid - v[i];
    }
    if (n_samples % 2 == 1) v[n_samples / 2] = 0.5 * (range.lo + range.hi);
    return v;
}

FssResult fss_sample(const HnaModel& model, std::size_t condition, std::size_t n_samples, Rng& rng) {
    FssResult r;
    r.skip_values = fss_grid(model.config.observer_range(), n_samples);
    const std::vector<std::size_t> conditions(n_samples, condition);
    check_conditions(model, conditions);

    PriorNoise noise;
    if (model.config.fss_redraw_prior) {
        noise = draw_prior_noise(model.prior, conditions, rng);
    } else {
        const std::size_t one[] = {condition};
        const PriorNoise single = draw_prior_noise(model.prior, one, rng);
        noise.eps = Matrix(n_samples, single.eps.cols());
        for (std::size_t i = 0; i < n_samples; ++i) {
            std::copy(single.eps.data(), single.eps.data() + single.eps.cols(),
                      noise.eps.data() + i * single.eps.cols());
            noise.gather.insert(noise.gather.end(), single.gather.begin(), single.gather.end());
        }
    }
    Matrix skips(n_samples, 1);
    for (std::size_t i = 0; i < n_samples; ++i) skips[i] = r.skip_values[i];

    HnaBatch batch{Matrix(0, 0), conditions};
    ad::Graph g;
    ParamNodes params(g);
    const HnaNodes nodes = build_hna_graph(params, model, batch, noise, nullptr, &skips);
    g.forward();
    r.outputs = g.value(nodes.output);
    return r;
}

std::vector<double> hrn_predict(const HnaModel& model, const HnaBatch& batch, Rng& rng) {
    if (model.config.mode != HnaMode::Regression) throw ConfigError("hrn_predict needs a regression model");
    const Matrix out = run_forward(model, batch, rng);
    return {out.values().begin(), out.values().end()};
}

double hrn_predict(const HnaModel& model, std::span<const std::size_t> peptide_indices,
                   std::size_t allele, Rng& rng) {
    if (peptide_indices.size() != model.config.peptide_slots) {
        throw DataError("peptide encoding must have " + std::to_string(model.config.peptide_slots) +
                        " slots, got " + std::to_string(peptide_indices.size()));
    }
    HnaBatch batch{Matrix(1, peptide_indices.size()), {allele}};
    for (std::size_t i = 0; i < peptide_indices.size(); ++i) {
        if (peptide_indices[i] >= kVocabularySize) {
            throw DataError("residue index " + std::to_string(peptide_indices[i]) + " outside vocabulary");
        }
        batch.inputs[i] = static_cast<double>(peptide_indices[i]);
    }
    return hrn_predict(model, batch, rng).front();
}

HnaBatch make_batch(const HnaModel& model, const LabeledDataset& dataset,
                    std::span<const std::size_t> rows) {
    (void)model;
    HnaBatch b;
    b.inputs = dataset.inputs.gather_rows(rows);
    b.conditions.reserve(rows.size());
    for (auto r : rows) b.conditions.push_back(dataset.conditions[r]);
    return b;
}

namespace {

Matrix batch_targets(const HnaModel& model, const LabeledDataset& dataset, const HnaBatch& batch,
                     std::span<const std::size_t> rows) {
    if (model.config.mode == HnaMode::Generative) return batch.inputs;
    if (!dataset.targets) throw DataError("regression training needs targets");
    Matrix t(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) t[i] = (*dataset.targets)[rows[i]];
    return t;
}

Matrix draw_extra_noise(const HnaModel& model, std::size_t rows, Rng& rng) {
    Matrix m(rows, model.prior.sample_dim());
    for (auto& v : m.values()) v = model.config.extra_noise_std * rng.normal();
    return m;
}

}  // namespace

std::vector<EpochRecord> train(HnaModel& model, const LabeledDataset& dataset, const TrainConfig& config,
                               const EpochCallback& on_epoch) {
    dataset.validate();
    check_conditions(model, dataset.conditions);
    if (model.config.mode == HnaMode::Regression && !dataset.targets) {
        throw DataError("regression training needs targets");
    }
    std::vector<ParamRef> refs = model.parameters();
    AdagradState opt;
    opt.learning_rate = config.learning_rate;
    Rng rng = Rng::derive(config.seed, 0x7A1);

    std::vector<EpochRecord> log;
    const Stopwatch clock;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<Matrix> snapshot;
        snapshot.reserve(refs.size());
        for (const auto& r : refs) snapshot.push_back(*r.value);

        double loss_sum = 0.0;
        for (const auto& rows : epoch_batches(dataset.size(), config.batch_size, rng)) {
            const HnaBatch batch = make_batch(model, dataset, rows);
            const Matrix target = batch_targets(model, dataset, batch, rows);
            const PriorNoise noise = draw_prior_noise(model.prior, batch.conditions, rng);
            std::optional<Matrix> extra;
            if (model.config.extra_noise_std > 0) extra = draw_extra_noise(model, rows.size(), rng);

            ad::Graph g;
            ParamNodes params(g);
            const HnaNodes nodes = build_hna_graph(params, model, batch, noise, extra ? &*extra : nullptr);
            const ad::NodeId loss = g.mse(nodes.output, g.constant(target, "target"));
            g.forward();
            const double value = g.value(loss)[0];
            if (!std::isfinite(value)) {
                for (std::size_t k = 0; k < refs.size(); ++k) *refs[k].value = snapshot[k];
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
            }
            g.backward(loss);

            std::vector<Matrix> owned;
            owned.reserve(refs.size());
            std::vector<const Matrix*> grads(refs.size(), nullptr);
            for (std::size_t k = 0; k < refs.size(); ++k) {
                const auto it = params.ids().find(refs[k].value);
                if (it == params.ids().end()) continue;
                grads[k] = &g.grad(it->second);
                if (refs[k].value == &model.embedding && model.config.freeze_pad) {
                    Matrix masked = *grads[k];
                    for (std::size_t j = 0; j < masked.cols(); ++j) masked(kPadIndex, j) = 0.0;
                    owned.push_back(std::move(masked));
                    grads[k] = &owned.back();
                }
            }
            try {
                adagrad_step(refs, grads, opt);
            } catch (const NumericalError&) {
                for (std::size_t k = 0; k < refs.size(); ++k) *refs[k].value = snapshot[k];
                throw;
            }
            loss_sum += value * static_cast<double>(rows.size());
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(dataset.size()), clock.seconds()};
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return log;
}

double evaluate_loss(const HnaModel& model, const LabeledDataset& dataset, Rng& rng) {
    std::vector<std::size_t> rows(dataset.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const HnaBatch batch = make_batch(model, dataset, rows);
    const Matrix out = run_forward(model, batch, rng);
    return mse_loss(out, batch_targets(model, dataset, batch, rows));
}

}  // namespace holonet
