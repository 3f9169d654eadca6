#pragma once

// Observer + backbone networks.
//
// The observer maps an example to one bounded scalar o. The backbone starts
// from a prior sample h₀ drawn for the example's condition, and every backbone
// layer (output included) sees its predecessor concatenated with o repeated
// to the predecessor's width:
//
//     h_n = f(W_n · (h_{n-1} | s_n)) + b_n
//
// In generative mode (HGN) the observer sees the example and the backbone
// reconstructs it. In regression mode (HRN) the observer sees embedded
// peptide residues and the backbone emits a single affinity in [0, 1].

#include "holonet/activation.hpp"
#include "holonet/adagrad.hpp"
#include "holonet/dataset.hpp"
#include "holonet/layers.hpp"
#include "holonet/prior.hpp"
#include "holonet/rng.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace holonet {

enum class HnaMode { Generative, Regression };

std::string_view to_string(HnaMode m);
HnaMode hna_mode_from_string(std::string_view name);

struct HnaConfig {
    HnaMode mode = HnaMode::Generative;
    /// Observer input width (generative mode; regression derives it from the embedding).
    std::size_t input_dim = 0;
    /// Backbone output width; 1 in regression mode.
    std::size_t output_dim = 0;
    std::size_t num_conditions = 1;

    std::size_t width = 128;
    std::size_t observer_depth = 2;
    std::size_t backbone_depth = 4;

    /// Network-wide non-linearity. Sine10 means sine hidden layers with the
    /// observer's sine output multiplied by 10.
    ActivationKind activation = ActivationKind::Sine;
    /// Backbone output layer; unset picks sine_norm01 for the sine family and
    /// `activation` otherwise.
    std::optional<ActivationKind> output_activation;
    BiasPlacement hidden_bias = BiasPlacement::PostActivation;
    BiasPlacement output_bias = BiasPlacement::PreActivation;

    std::size_t components = 16;
    SampleMode sample_mode = SampleMode::VectorPerGaussian;
    std::size_t draw_dim = 16;
    /// Std of extra Gaussian noise added to each prior sample during training.
    double extra_noise_std = 0.0;

    std::size_t embedding_dim = 32;
    std::size_t peptide_slots = 11;
    bool freeze_pad = true;

    /// Redraw the prior for every swept value in full spectrum sampling.
    bool fss_redraw_prior = false;

    ActivationKind hidden_activation() const;
    ActivationKind backbone_output_activation() const;
    /// Factor applied to the observer's sine output (10 for sin10, else 1).
    double observer_scale() const;
    /// Closed range of the observer scalar.
    ActivationRange observer_range() const;
    std::size_t observer_input_dim() const;
    void validate() const;
};

nlohmann::json to_json(const HnaConfig& c);
HnaConfig hna_config_from_json(const nlohmann::json& j);

struct HnaModel {
    HnaConfig config;
    /// Hidden layers followed by the one-unit sine output.
    std::vector<DenseLayer> observer;
    /// Skip layers; the last one is the output layer.
    std::vector<DenseLayer> backbone;
    MixturePrior prior;
    /// 21×E residue table (regression mode only); row 0 is padding.
    Matrix embedding;

    std::vector<ParamRef> parameters();
};

/// Glorot layers, uniform [0, 1] prior, uniform embedding (pad row zero when frozen).
HnaModel make_hna(const HnaConfig& config, Rng& rng);

/// Observer input for one batch: dense rows (generative) or residue indices
/// (regression, `peptide_slots` per row, stored as doubles).
struct HnaBatch {
    Matrix inputs;
    std::vector<std::size_t> conditions;
};

struct HnaNodes {
    ad::NodeId observer;
    ad::NodeId prior_sample;
    ad::NodeId output;
};

/// Wires one batch into `params.graph()`. When `observer_override` is given
/// (B×1), the observer network is bypassed and those values drive the skips.
HnaNodes build_hna_graph(ParamNodes& params, const HnaModel& model, const HnaBatch& batch,
                         const PriorNoise& noise, const Matrix* extra_noise = nullptr,
                         const Matrix* observer_override = nullptr);

/// Observer scalars for each row, B×1.
Matrix observe(const HnaModel& model, const HnaBatch& batch);

/// Reconstructions for each row, drawing prior samples from rng.
Matrix hgn_forward(const HnaModel& model, const Matrix& inputs,
                   std::span<const std::size_t> conditions, Rng& rng);
/// Single-example form.
Matrix hgn_forward(const HnaModel& model, std::span<const double> input, std::size_t condition,
                   Rng& rng);

struct FssResult {
    /// Ascending, evenly spaced over the observer range.
    std::vector<double> skip_values;
    /// One backbone output per skip value.
    Matrix outputs;
};

/// Full spectrum sampling: bypass the observer and sweep its range.
FssResult fss_sample(const HnaModel& model, std::size_t condition, std::size_t n_samples, Rng& rng);
/// n evenly spaced values from lo to hi inclusive.
std::vector<double> fss_grid(ActivationRange range, std::size_t n_samples);

/// Predicted affinity in [0, 1] for one encoded peptide.
double hrn_predict(const HnaModel& model, std::span<const std::size_t> peptide_indices,
                   std::size_t allele, Rng& rng);
/// Batched predictions, one per row of `batch`.
std::vector<double> hrn_predict(const HnaModel& model, const HnaBatch& batch, Rng& rng);

struct TrainConfig {
    std::size_t epochs = 100;
    /// 0 trains full-batch.
    std::size_t batch_size = 128;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adagrad on the MSE loss. Generative targets are the inputs themselves;
/// regression targets are dataset.targets (already normalized). On a
/// non-finite loss the parameters are restored to the start of the failing
/// epoch and NumericalError is thrown.
std::vector<EpochRecord> train(HnaModel& model, const LabeledDataset& dataset,
                               const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Mean MSE of the model on a dataset (one fresh prior draw per row).
double evaluate_loss(const HnaModel& model, const LabeledDataset& dataset, Rng& rng);

/// Splits dataset rows into observer batches.
HnaBatch make_batch(const HnaModel& model, const LabeledDataset& dataset,
                    std::span<const std::size_t> rows);

}  // namespace holonet
