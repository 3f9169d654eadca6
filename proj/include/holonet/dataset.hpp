#pragma once

#include "holonet/matrix.hpp"
#include "holonet/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace holonet {

/// Where a dataset came from and what was done to it.
struct Provenance {
    std::string source;
    std::optional<std::uint64_t> seed;
    /// σ of the one-time clipped Gaussian corruption, if applied.
    std::optional<double> sigma;
    std::optional<std::uint64_t> corruption_seed;
    /// Gaussian noise added at generation time (synthetic sources).
    std::optional<double> generation_noise_std;

    bool corrupted() const noexcept { return sigma.has_value(); }
};

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

/// n labelled examples. For autoencoding the target is the input itself and
/// `targets` is empty.
struct LabeledDataset {
    Matrix inputs;
    std::vector<std::size_t> conditions;
    std::optional<std::vector<double>> targets;
    /// Display name of each condition index (class label, allele, tumour type).
    std::vector<std::string> condition_names;
    Provenance provenance;
    /// Image geometry when rows are flattened images, else 0.
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;

    std::size_t size() const noexcept { return inputs.rows(); }
    std::size_t dim() const noexcept { return inputs.cols(); }
    std::size_t num_conditions() const noexcept { return condition_names.size(); }

    /// Rows in the given order; metadata is carried over.
    LabeledDataset subset(std::span<const std::size_t> rows) const;
    /// Row indices whose condition equals c.
    std::vector<std::size_t> rows_with_condition(std::size_t c) const;
    /// Throws DataError unless the invariants hold (n > 0, labels in range,
    /// target count matches).
    void validate() const;
};

/// Three (by default) concentric half-circle arcs, one class per arc.
struct CrescentSpec {
    std::size_t n_per_class = 1000;
    std::vector<double> radii{1.0, 2.0, 3.0};
    double noise_std = 0.0;
};

/// Class k point: (r_k cos θ, r_k sin θ) + N(0, noise_std²)·I₂ with θ ~ U[0, π].
LabeledDataset gen_crescents(const CrescentSpec& spec, Rng& rng);

/// max(0, X + N(0, σ²)) elementwise, applied once. Throws DataError if the
/// dataset already carries a corruption record.
LabeledDataset corrupt(const LabeledDataset& dataset, double sigma, std::uint64_t seed);

/// Big-endian IDX images (magic 0x00000803) and labels (0x00000801). Pixels
/// are scaled to [0, 1] by /255.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

void write_idx_images(const std::filesystem::path& path, std::span<const std::uint8_t> pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// Column roles for CSV ingestion. Columns not named here must be numeric
/// unless a sequence column is given, in which case the encoded sequence is
/// the input and other columns are ignored.
struct CsvSchema {
    std::string condition_column;
    std::optional<std::string> target_column;
    std::optional<std::string> sequence_column;
    std::size_t sequence_length = 11;
};

/// Parses a header-first CSV. Target cells may carry a "<" or ">" qualifier;
/// the bound itself becomes the target.
LabeledDataset load_csv_matrix(const std::filesystem::path& path, const CsvSchema& schema);

/// Parses a target cell such as "100", "<100" or ">5e4".
double parse_qualified_value(std::string_view cell);

struct NormalizedValues {
    std::vector<double> values;
    /// max of log2(V + 2), kept for the inverse map.
    double max_log = 0.0;
};

/// X = log2(V + 2), then X / max(X).
NormalizedValues normalize_affinity(std::span<const double> values);
/// Inverse of normalize_affinity for one value: 2^(x·max_log) − 2.
double denormalize_affinity(double normalized, double max_log);

/// Uniform random permutation; the first floor(0.8·n) rows train.
std::pair<LabeledDataset, LabeledDataset> split_80_20(const LabeledDataset& dataset,
                                                      std::uint64_t seed);

/// Per-column affine map of the data range onto [0, 1].
struct UnitScaling {
    std::vector<double> lo;
    std::vector<double> hi;

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& y) const;
    bool empty() const noexcept { return lo.empty(); }
};

UnitScaling fit_unit_scaling(const Matrix& x);
nlohmann::json to_json(const UnitScaling& s);
UnitScaling unit_scaling_from_json(const nlohmann::json& j);

/// Random peptides labelled with a fixed synthetic binding strength. The
/// strength depends on a position-specific residue score shared by all
/// alleles, passed through an allele-specific slope and offset:
///     t = logistic(α_a · s(peptide) + β_a),   V = 50000^(1 − t).
/// The score weights are fixed constants of the library, not seeded.
struct SyntheticAffinitySpec {
    std::size_t n = 2000;
    std::size_t n_alleles = 4;
    std::size_t min_length = 8;
    std::size_t max_length = 11;
};

double synthetic_affinity(std::string_view peptide, std::size_t allele);

/// Inputs are encoded residue indices (11 slots); targets are raw V.
LabeledDataset gen_synthetic_affinity(const SyntheticAffinitySpec& spec, Rng& rng);

/// Writes {source, seed, sigma, ...} next to a dataset.
void write_provenance_sidecar(const std::filesystem::path& path, const Provenance& p);

}  // namespace holonet
