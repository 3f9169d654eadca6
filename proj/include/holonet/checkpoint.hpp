#pragma once

// JSON model container shared by every model kind:
//
//     {"format": "holonet-checkpoint", "version": 1, "kind": "hgn",
//      "config": {...}, "conditions": [...], "params": {name: {rows, cols, data}},
//      "scaling": {...}?, "max_log": x?, "image": [rows, cols]?, "provenance": {...}?}
//
// Keys are emitted sorted and doubles in shortest round-trip form, so
// save → load → save reproduces the file byte for byte.

#include "holonet/baselines.hpp"
#include "holonet/dataset.hpp"
#include "holonet/hna.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace holonet {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    /// hgn, hrn, ae, dae or vae.
    std::string kind;
    nlohmann::json config;
    std::vector<std::string> condition_names;
    std::map<std::string, Matrix> params;
    std::optional<UnitScaling> scaling;
    std::optional<double> max_log;
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;
    std::optional<Provenance> provenance;
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(HnaModel& model);
Checkpoint make_checkpoint(AeModel& model);
Checkpoint make_checkpoint(VaeModel& model);

/// Rebuild a model; throws DataError on a kind, name or shape mismatch.
HnaModel hna_from_checkpoint(const Checkpoint& c);
AeModel ae_from_checkpoint(const Checkpoint& c);
VaeModel vae_from_checkpoint(const Checkpoint& c);

}  // namespace holonet
