#include "holonet/run_config.hpp"

#include "holonet/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace holonet {

namespace {

using nlohmann::json;

template <typename E>
struct NameTable {
    E value;
    std::string_view name;
};

constexpr NameTable<ExperimentKind> kExperiments[] = {
    {ExperimentKind::TrainHgn, "train-hgn"},
    {ExperimentKind::TrainHrn, "train-hrn"},
    {ExperimentKind::TrainBaseline, "train-baseline"},
    {ExperimentKind::Fss, "fss"},
    {ExperimentKind::DenoiseEval, "denoise-eval"},
    {ExperimentKind::ActivationStudy, "activation-study"},
    {ExperimentKind::PcaEval, "pca-eval"},
    {ExperimentKind::Predict, "predict"},
};

constexpr NameTable<DataSource> kSources[] = {
    {DataSource::Crescents, "crescents"},
    {DataSource::Idx, "idx"},
    {DataSource::Csv, "csv"},
    {DataSource::SyntheticAffinity, "synthetic-affinity"},
};

constexpr NameTable<BaselineKind> kBaselines[] = {
    {BaselineKind::Ae, "ae"},
    {BaselineKind::Dae, "dae"},
    {BaselineKind::Vae, "vae"},
};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E> (&table)[N], E v) {
    for (const auto& t : table) {
        if (t.value == v) return t.name;
    }
    return "?";
}

template <typename E, std::size_t N>
E value_of(const NameTable<E> (&table)[N], std::string_view name, std::string_view what) {
    for (const auto& t : table) {
        if (t.name == name) return t.value;
    }
    std::string known;
    for (const auto& t : table) known += (known.empty() ? "" : ", ") + std::string(t.name);
    throw ConfigError("unknown " + std::string(what) + " '" + std::string(name) + "' (expected one of " +
                      known + ")");
}

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(field(key) + " has the wrong type");
        }
    }

    template <typename T>
    void read(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        read(key, v);
        out = v;
    }

    template <typename F>
    void read_with(const char* key, F&& parse) {
        seen_.insert(key);
        if (j_.contains(key) && !j_.at(key).is_null()) parse(j_.at(key));
    }

    std::optional<Section> child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Section(j_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) throw ConfigError("unknown key " + field(k.c_str()));
        }
    }

    std::string field(const char* key) const { return "'" + (path_.empty() ? "" : path_ + ".") + key + "'"; }

private:
    std::string label() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string activation_name(const json& v) {
    if (!v.is_string()) throw ConfigError("activation names must be strings");
    return v.get<std::string>();
}

}  // namespace

std::string_view to_string(ExperimentKind k) { return name_of(kExperiments, k); }
ExperimentKind experiment_kind_from_string(std::string_view name) {
    return value_of(kExperiments, name, "experiment");
}
std::string_view to_string(DataSource s) { return name_of(kSources, s); }
DataSource data_source_from_string(std::string_view name) { return value_of(kSources, name, "data source"); }
std::string_view to_string(BaselineKind k) { return name_of(kBaselines, k); }
BaselineKind baseline_kind_from_string(std::string_view name) { return value_of(kBaselines, name, "baseline"); }

bool DataConfig::scale_to_unit() const { return unit_scale.value_or(source == DataSource::Crescents); }

std::size_t RunConfig::epochs() const {
    if (optimizer.epochs) return *optimizer.epochs;
    switch (data.source) {
        case DataSource::Crescents: return 2000;
        case DataSource::SyntheticAffinity: return 500;
        default: return experiment == ExperimentKind::TrainHrn ? 500 : 300;
    }
}

std::size_t RunConfig::batch_size() const {
    if (optimizer.batch_size) return *optimizer.batch_size;
    return data.source == DataSource::Crescents ? 128 : 32;
}

double RunConfig::learning_rate() const {
    if (optimizer.learning_rate) return *optimizer.learning_rate;
    return experiment == ExperimentKind::TrainHrn ? 0.001 : 0.01;
}

void RunConfig::validate() const {
    if (data.source == DataSource::Crescents) {
        if (data.n_per_class == 0 || data.radii.empty()) throw ConfigError("crescents need points and radii");
        for (std::size_t k = 1; k < data.radii.size(); ++k) {
            if (!(data.radii[k] > data.radii[k - 1])) throw ConfigError("crescent radii must be strictly increasing");
        }
        if (data.noise_std < 0) throw ConfigError("noise_std must be non-negative");
    }
    if (data.source == DataSource::Idx && (data.images.empty() || data.labels.empty())) {
        throw ConfigError("idx data needs 'images' and 'labels' paths");
    }
    if (data.source == DataSource::Csv && (data.csv.empty() || data.condition_column.empty())) {
        throw ConfigError("csv data needs 'csv' and 'condition_column'");
    }
    if (data.corruption_sigma && *data.corruption_sigma < 0) throw ConfigError("corruption_sigma must be >= 0");
    if (data.corruption_sigma && data.source == DataSource::Crescents) {
        throw ConfigError("crescents take generation noise ('noise_std'), not corruption_sigma");
    }
    if (!(learning_rate() > 0)) throw ConfigError("learning_rate must be positive");
    if (model.width == 0 || model.components == 0) throw ConfigError("model width and components must be positive");
    if (fss.n < 2 && experiment == ExperimentKind::Fss) throw ConfigError("fss needs n >= 2");
    if (study.activations.empty() && experiment == ExperimentKind::ActivationStudy) {
        throw ConfigError("activation study needs at least one activation");
    }
    if (study.repeats == 0) throw ConfigError("study repeats must be >= 1");
    for (double s : denoise.sigmas) {
        if (s < 0) throw ConfigError("denoise sigmas must be non-negative");
    }
    for (const auto& m : denoise.models) {
        if (m != "hgn" && m != "ae" && m != "dae" && m != "vae") {
            throw ConfigError("unknown denoise model '" + m + "'");
        }
    }
    if (pca.n_components == 0) throw ConfigError("pca n_components must be positive");
}

nlohmann::json to_json(const RunConfig& c) {
    json data = {{"source", to_string(c.data.source)},
                 {"seed", c.data.seed ? json(*c.data.seed) : json(nullptr)},
                 {"n_per_class", c.data.n_per_class},
                 {"radii", c.data.radii},
                 {"noise_std", c.data.noise_std},
                 {"unit_scale", c.data.unit_scale ? json(*c.data.unit_scale) : json(nullptr)},
                 {"corruption_sigma", c.data.corruption_sigma ? json(*c.data.corruption_sigma) : json(nullptr)},
                 {"images", c.data.images},
                 {"labels", c.data.labels},
                 {"per_class_limit", c.data.per_class_limit},
                 {"csv", c.data.csv},
                 {"condition_column", c.data.condition_column},
                 {"target_column", c.data.target_column ? json(*c.data.target_column) : json(nullptr)},
                 {"sequence_column", c.data.sequence_column ? json(*c.data.sequence_column) : json(nullptr)},
                 {"n_examples", c.data.n_examples},
                 {"n_alleles", c.data.n_alleles}};
    json model = {{"width", c.model.width},
                  {"observer_depth", c.model.observer_depth},
                  {"backbone_depth", c.model.backbone_depth},
                  {"activation", to_string(c.model.activation)},
                  {"output_activation",
                   c.model.output_activation ? json(to_string(*c.model.output_activation)) : json(nullptr)},
                  {"hidden_bias", to_string(c.model.hidden_bias)},
                  {"output_bias", to_string(c.model.output_bias)},
                  {"components", c.model.components},
                  {"sample_mode", to_string(c.model.sample_mode)},
                  {"draw_dim", c.model.draw_dim},
                  {"extra_noise_std", c.model.extra_noise_std},
                  {"embedding_dim", c.model.embedding_dim},
                  {"freeze_pad", c.model.freeze_pad},
                  {"fss_redraw_prior", c.model.fss_redraw_prior}};
    json optimizer = {{"epochs", c.optimizer.epochs ? json(*c.optimizer.epochs) : json(nullptr)},
                      {"batch_size", c.optimizer.batch_size ? json(*c.optimizer.batch_size) : json(nullptr)},
                      {"learning_rate", c.optimizer.learning_rate ? json(*c.optimizer.learning_rate) : json(nullptr)}};
    json baseline = {{"kind", to_string(c.baseline.kind)},  {"width", c.baseline.width},
                     {"depth", c.baseline.depth},           {"bottleneck", c.baseline.bottleneck},
                     {"noise_std", c.baseline.noise_std},   {"latent_dim", c.baseline.latent_dim}};
    json activations = json::array();
    for (auto a : c.study.activations) activations.push_back(to_string(a));
    return {{"experiment", to_string(c.experiment)},
            {"seed", c.seed},
            {"output_dir", c.output_dir},
            {"data", data},
            {"model", model},
            {"optimizer", optimizer},
            {"baseline", baseline},
            {"fss", {{"checkpoint", c.fss.checkpoint}, {"condition", c.fss.condition}, {"n", c.fss.n},
                     {"per_row", c.fss.per_row}}},
            {"study", {{"activations", activations}, {"repeats", c.study.repeats}}},
            {"denoise", {{"sigmas", c.denoise.sigmas}, {"models", c.denoise.models}}},
            {"pca", {{"checkpoint", c.pca.checkpoint}, {"n_components", c.pca.n_components},
                     {"n_generated", c.pca.n_generated}}},
            {"predict", {{"checkpoint", c.predict.checkpoint}, {"peptide", c.predict.peptide},
                         {"allele", c.predict.allele}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    Section top(j, "");
    top.read_with("experiment", [&](const json& v) {
        c.experiment = experiment_kind_from_string(v.get<std::string>());
    });
    top.read("seed", c.seed);
    top.read("output_dir", c.output_dir);

    if (auto s = top.child("data")) {
        s->read_with("source", [&](const json& v) { c.data.source = data_source_from_string(v.get<std::string>()); });
        s->read("seed", c.data.seed);
        s->read("n_per_class", c.data.n_per_class);
        s->read("radii", c.data.radii);
        s->read("noise_std", c.data.noise_std);
        s->read("unit_scale", c.data.unit_scale);
        s->read("corruption_sigma", c.data.corruption_sigma);
        s->read("images", c.data.images);
        s->read("labels", c.data.labels);
        s->read("per_class_limit", c.data.per_class_limit);
        s->read("csv", c.data.csv);
        s->read("condition_column", c.data.condition_column);
        s->read("target_column", c.data.target_column);
        s->read("sequence_column", c.data.sequence_column);
        s->read("n_examples", c.data.n_examples);
        s->read("n_alleles", c.data.n_alleles);
        s->finish();
    }
    if (auto s = top.child("model")) {
        s->read("width", c.model.width);
        s->read("observer_depth", c.model.observer_depth);
        s->read("backbone_depth", c.model.backbone_depth);
        s->read_with("activation", [&](const json& v) { c.model.activation = activation_from_string(activation_name(v)); });
        s->read_with("output_activation", [&](const json& v) {
            c.model.output_activation = activation_from_string(activation_name(v));
        });
        s->read_with("hidden_bias", [&](const json& v) {
            c.model.hidden_bias = bias_placement_from_string(v.get<std::string>());
        });
        s->read_with("output_bias", [&](const json& v) {
            c.model.output_bias = bias_placement_from_string(v.get<std::string>());
        });
        s->read("components", c.model.components);
        s->read_with("sample_mode", [&](const json& v) {
            c.model.sample_mode = sample_mode_from_string(v.get<std::string>());
        });
        s->read("draw_dim", c.model.draw_dim);
        s->read("extra_noise_std", c.model.extra_noise_std);
        s->read("embedding_dim", c.model.embedding_dim);
        s->read("freeze_pad", c.model.freeze_pad);
        s->read("fss_redraw_prior", c.model.fss_redraw_prior);
        s->finish();
    }
    if (auto s = top.child("optimizer")) {
        s->read("epochs", c.optimizer.epochs);
        s->read("batch_size", c.optimizer.batch_size);
        s->read("learning_rate", c.optimizer.learning_rate);
        s->finish();
    }
    if (auto s = top.child("baseline")) {
        s->read_with("kind", [&](const json& v) { c.baseline.kind = baseline_kind_from_string(v.get<std::string>()); });
        s->read("width", c.baseline.width);
        s->read("depth", c.baseline.depth);
        s->read("bottleneck", c.baseline.bottleneck);
        s->read("noise_std", c.baseline.noise_std);
        s->read("latent_dim", c.baseline.latent_dim);
        s->finish();
    }
    if (auto s = top.child("fss")) {
        s->read("checkpoint", c.fss.checkpoint);
        s->read_with("condition", [&](const json& v) {
            c.fss.condition = v.is_string() ? v.get<std::string>() : v.dump();
        });
        s->read("n", c.fss.n);
        s->read("per_row", c.fss.per_row);
        s->finish();
    }
    if (auto s = top.child("study")) {
        s->read_with("activations", [&](const json& v) {
            if (!v.is_array()) throw ConfigError("'study.activations' must be a list");
            c.study.activations.clear();
            for (const auto& a : v) c.study.activations.push_back(activation_from_string(activation_name(a)));
        });
        s->read("repeats", c.study.repeats);
        s->finish();
    }
    if (auto s = top.child("denoise")) {
        s->read("sigmas", c.denoise.sigmas);
        s->read("models", c.denoise.models);
        s->finish();
    }
    if (auto s = top.child("pca")) {
        s->read("checkpoint", c.pca.checkpoint);
        s->read("n_components", c.pca.n_components);
        s->read("n_generated", c.pca.n_generated);
        s->finish();
    }
    if (auto s = top.child("predict")) {
        s->read("checkpoint", c.predict.checkpoint);
        s->read("peptide", c.predict.peptide);
        s->read("allele", c.predict.allele);
        s->finish();
    }
    top.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

HnaConfig make_hna_config(const ModelConfig& m, HnaMode mode, std::size_t input_dim, std::size_t output_dim,
                          std::size_t num_conditions) {
    HnaConfig c;
    c.mode = mode;
    c.input_dim = input_dim;
    c.output_dim = output_dim;
    c.num_conditions = num_conditions;
    c.width = m.width;
    c.observer_depth = m.observer_depth;
    c.backbone_depth = m.backbone_depth;
    c.activation = m.activation;
    c.output_activation = m.output_activation;
    c.hidden_bias = m.hidden_bias;
    c.output_bias = m.output_bias;
    c.components = m.components;
    c.sample_mode = m.sample_mode;
    c.draw_dim = m.draw_dim;
    c.extra_noise_std = m.extra_noise_std;
    c.embedding_dim = m.embedding_dim;
    c.freeze_pad = m.freeze_pad;
    c.fss_redraw_prior = m.fss_redraw_prior;
    c.validate();
    return c;
}

}  // namespace holonet
