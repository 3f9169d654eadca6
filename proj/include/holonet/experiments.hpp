#pragma once

// The commands behind the CLI. Each takes a validated RunConfig, writes its
// artifacts under config.output_dir and returns a JSON summary.
//
// cmd_train writes
//     checkpoint.json   model container (see checkpoint.hpp)
//     metrics.jsonl     one {"epoch", "loss"} record per epoch
//     timing.jsonl      one {"epoch", "seconds"} record per epoch
//     config.json       the resolved RunConfig
// Wall time lives in its own file so that metrics.jsonl is byte-identical
// across reruns with the same config and seed.

#include "holonet/checkpoint.hpp"
#include "holonet/dataset.hpp"
#include "holonet/run_config.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace holonet {

/// A dataset as the model sees it, plus what is needed to map back.
struct PreparedData {
    /// Inputs in their original units (after any one-time corruption).
    LabeledDataset original;
    /// Inputs after unit scaling; targets normalized for regression.
    LabeledDataset model_view;
    std::optional<UnitScaling> scaling;
    std::optional<double> max_log;
};

/// Generates or loads the configured data and applies corruption, scaling
/// and target normalization. `sigma_override` replaces the noise level (the
/// generation noise for crescents, the corruption σ for images).
PreparedData prepare_data(const RunConfig& config, std::optional<double> sigma_override = std::nullopt);

nlohmann::json cmd_train(const RunConfig& config);
nlohmann::json cmd_fss(const RunConfig& config);
nlohmann::json cmd_denoise_eval(const RunConfig& config);
nlohmann::json cmd_activation_study(const RunConfig& config);
nlohmann::json cmd_pca_eval(const RunConfig& config);
nlohmann::json cmd_predict(const RunConfig& config);

/// Dispatches on config.experiment.
nlohmann::json run_experiment(const RunConfig& config);

/// Worker threads for study commands: HOLONET_THREADS if set, otherwise
/// the hardware concurrency.
std::size_t study_threads();

/// Runs tasks on up to `threads` workers; the first exception is rethrown
/// after all workers finish.
void run_parallel(const std::vector<std::function<void()>>& tasks, std::size_t threads);

/// Condition index for a registry name; throws DataError listing the known names.
std::size_t find_condition(const std::vector<std::string>& names, const std::string& name);

}  // namespace holonet
