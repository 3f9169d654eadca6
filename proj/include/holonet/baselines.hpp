#pragma once

// Comparison models: a plain autoencoder, its denoising variant, and a VAE
// with a diagonal Gaussian encoder, Bernoulli decoder and fixed N(0, I) prior.

#include "holonet/dataset.hpp"
#include "holonet/hna.hpp"
#include "holonet/layers.hpp"
#include "holonet/rng.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace holonet {

struct AeConfig {
    std::size_t input_dim = 0;
    std::size_t width = 128;
    /// Hidden relu layers on each side of the bottleneck.
    std::size_t depth = 2;
    std::size_t bottleneck = 2;
    /// Std of the fresh Gaussian input noise; 0 gives a plain autoencoder.
    double noise_std = 0.0;
    ActivationKind output_activation = ActivationKind::Identity;

    void validate() const;
};

nlohmann::json to_json(const AeConfig& c);
AeConfig ae_config_from_json(const nlohmann::json& j);

struct AeModel {
    AeConfig config;
    std::vector<DenseLayer> encoder;  // last layer is the linear bottleneck
    std::vector<DenseLayer> decoder;  // last layer is the output
    std::vector<ParamRef> parameters();
};

AeModel make_ae(const AeConfig& config, Rng& rng);

/// decode(encode(x)).
Matrix ae_forward(const AeModel& model, const Matrix& x);
/// decode(encode(x + N(0, noise_std²))) with fresh noise from rng.
Matrix dae_forward(const AeModel& model, const Matrix& x, Rng& rng);

/// MSE against the dataset inputs (which may themselves be corrupted). The
/// input noise is redrawn every step when config.noise_std > 0.
std::vector<EpochRecord> train_ae(AeModel& model, const LabeledDataset& dataset,
                                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct VaeConfig {
    std::size_t input_dim = 0;
    std::size_t width = 128;
    std::size_t depth = 2;
    std::size_t latent_dim = 2;

    void validate() const;
};

nlohmann::json to_json(const VaeConfig& c);
VaeConfig vae_config_from_json(const nlohmann::json& j);

struct VaeModel {
    VaeConfig config;
    std::vector<DenseLayer> encoder;  // relu hidden layers
    DenseLayer mu_head;
    DenseLayer logvar_head;
    std::vector<DenseLayer> decoder;  // relu hidden layers, then a sigmoid output
    std::vector<ParamRef> parameters();
};

VaeModel make_vae(const VaeConfig& config, Rng& rng);

struct VaeForward {
    Matrix reconstruction;  // π_θ(z), each entry in (0, 1)
    Matrix mu;
    Matrix logvar;
    Matrix z;
};

/// Node handles of one VAE batch; `loss` is the batch-mean negative ELBO and
/// `nll` / `kl` are batch sums.
struct VaeNodes {
    ad::NodeId mu;
    ad::NodeId logvar;
    ad::NodeId z;
    ad::NodeId reconstruction;
    ad::NodeId nll;
    ad::NodeId kl;
    ad::NodeId loss;
};

/// Wires encoder, reparameterization, decoder and the ELBO terms for x and
/// frozen ε (B×latent) into `params.graph()`.
VaeNodes build_vae_graph(ParamNodes& params, const VaeModel& model, const Matrix& x, const Matrix& eps);

/// z = μ + exp(logvar/2)·ε with ε drawn from rng.
VaeForward vae_forward(const VaeModel& model, const Matrix& x, Rng& rng);
/// Same with caller-supplied ε (B×latent).
VaeForward vae_forward_with_noise(const VaeModel& model, const Matrix& x, const Matrix& eps);

struct ElboTerms {
    double nll = 0.0;
    double kl = 0.0;
    double negative_elbo = 0.0;
};

/// Per-example means of the Bernoulli negative log-likelihood (summed over
/// dimensions, π clamped to [1e-7, 1−1e-7]) and KL(N(μ, σ²) ‖ N(0, I)).
/// Throws DataError if x leaves [0, 1].
ElboTerms vae_loss(const Matrix& x, const Matrix& reconstruction, const Matrix& mu,
                   const Matrix& logvar);

struct VaeEpochRecord {
    std::size_t epoch = 0;
    double negative_elbo = 0.0;
    double kl = 0.0;
    /// Smallest per-step KL seen during the epoch.
    double min_step_kl = 0.0;
    double seconds = 0.0;
};

std::vector<VaeEpochRecord> train_vae(VaeModel& model, const LabeledDataset& dataset,
                                      const TrainConfig& config,
                                      const std::function<void(const VaeEpochRecord&)>& on_epoch = {});

}  // namespace holonet
