#pragma once

// Full description of one experiment, read from and written back to JSON.
// Every field has a default, so `{"experiment": "train-hgn"}` is a complete
// crescents run. Unknown keys are rejected to catch typos early.

#include "holonet/baselines.hpp"
#include "holonet/hna.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace holonet {

enum class ExperimentKind {
    TrainHgn,
    TrainHrn,
    TrainBaseline,
    Fss,
    DenoiseEval,
    ActivationStudy,
    PcaEval,
    Predict,
};

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class DataSource { Crescents, Idx, Csv, SyntheticAffinity };

std::string_view to_string(DataSource s);
DataSource data_source_from_string(std::string_view name);

struct DataConfig {
    DataSource source = DataSource::Crescents;
    /// Seed of generation and corruption; unset follows the run seed.
    std::optional<std::uint64_t> seed;

    // crescents
    std::size_t n_per_class = 1000;
    std::vector<double> radii{1.0, 2.0, 3.0};
    /// Gaussian noise added when the crescents are generated.
    double noise_std = 0.0;
    /// Rescale each column onto [0, 1] before training (default: on for crescents).
    std::optional<bool> unit_scale;

    /// One-time clipped corruption max(0, X + N(0, σ²)); images only.
    std::optional<double> corruption_sigma;

    // idx
    std::string images;
    std::string labels;
    /// Keep at most this many rows per class (0 keeps all).
    std::size_t per_class_limit = 0;

    // csv
    std::string csv;
    std::string condition_column;
    std::optional<std::string> target_column;
    std::optional<std::string> sequence_column;

    // synthetic affinity
    std::size_t n_examples = 2000;
    std::size_t n_alleles = 4;

    bool scale_to_unit() const;
};

struct OptimizerConfig {
    /// Unset picks the per-dataset default: crescents 2000, affinity and train-hrn 500, else 300.
    std::optional<std::size_t> epochs;
    /// Unset picks crescents 128, otherwise 32; 0 trains full-batch.
    std::optional<std::size_t> batch_size;
    /// Unset picks 0.001 for train-hrn, otherwise 0.01.
    std::optional<double> learning_rate;
};

enum class BaselineKind { Ae, Dae, Vae };

std::string_view to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(std::string_view name);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::Ae;
    std::size_t width = 128;
    std::size_t depth = 2;
    std::size_t bottleneck = 2;
    double noise_std = 0.1;
    std::size_t latent_dim = 2;
};

/// Architecture overrides; input/output widths and condition count come
/// from the data.
struct ModelConfig {
    std::size_t width = 128;
    std::size_t observer_depth = 2;
    std::size_t backbone_depth = 4;
    ActivationKind activation = ActivationKind::Sine;
    std::optional<ActivationKind> output_activation;
    BiasPlacement hidden_bias = BiasPlacement::PostActivation;
    BiasPlacement output_bias = BiasPlacement::PreActivation;
    std::size_t components = 16;
    SampleMode sample_mode = SampleMode::VectorPerGaussian;
    std::size_t draw_dim = 16;
    double extra_noise_std = 0.0;
    std::size_t embedding_dim = 32;
    bool freeze_pad = true;
    bool fss_redraw_prior = false;
};

struct FssConfig {
    std::string checkpoint;
    std::string condition;
    std::size_t n = 100;
    /// Tiles per grid row for image output (0 puts all tiles in one row).
    std::size_t per_row = 0;
};

struct StudyConfig {
    std::vector<ActivationKind> activations{ActivationKind::Sigmoid, ActivationKind::Tanh,
                                            ActivationKind::Relu,    ActivationKind::LeakyRelu,
                                            ActivationKind::Sine,    ActivationKind::Sine10};
    /// Seeds per activation (seed, seed + 1, ...), summarized by the median.
    std::size_t repeats = 1;
};

struct DenoiseConfig {
    std::vector<double> sigmas{0.08, 0.16};
    std::vector<std::string> models{"hgn", "ae", "dae", "vae"};
};

struct PcaConfig {
    std::string checkpoint;
    std::size_t n_components = 4;
    /// FSS samples generated per condition.
    std::size_t n_generated = 100;
};

struct PredictConfig {
    std::string checkpoint;
    std::string peptide;
    std::string allele;
};

struct RunConfig {
    ExperimentKind experiment = ExperimentKind::TrainHgn;
    std::uint64_t seed = 1;
    std::string output_dir = "runs/out";
    DataConfig data;
    ModelConfig model;
    OptimizerConfig optimizer;
    BaselineConfig baseline;
    FssConfig fss;
    StudyConfig study;
    DenoiseConfig denoise;
    PcaConfig pca;
    PredictConfig predict;

    std::uint64_t data_seed() const { return data.seed.value_or(seed); }
    /// Epoch count after applying the per-dataset default.
    std::size_t epochs() const;
    /// Minibatch size after applying the per-dataset default.
    std::size_t batch_size() const;
    double learning_rate() const;
    void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full HnaConfig for a dataset of the given shape.
HnaConfig make_hna_config(const ModelConfig& m, HnaMode mode, std::size_t input_dim,
                          std::size_t output_dim, std::size_t num_conditions);

}  // namespace holonet
