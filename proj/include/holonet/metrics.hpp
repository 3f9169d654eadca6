#pragma once

#include "holonet/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace holonet {

struct PcaTransform {
    /// 1×D column means of the fit data.
    Matrix mean;
    /// n_components×D, orthonormal rows, largest-magnitude entry of each row positive.
    Matrix components;
    std::vector<double> explained_ratio;
    /// FNV-1a of the fit matrix bytes, so callers can prove what the fit saw.
    std::uint64_t fit_hash = 0;

    std::size_t dim() const noexcept { return components.cols(); }
    std::size_t n_components() const noexcept { return components.rows(); }
};

/// Thin SVD of the centered rows. Throws DataError when n < 2, when
/// n_components exceeds min(n, D), or when the numerical rank is lower.
PcaTransform pca_fit(const Matrix& x, std::size_t n_components);

/// (Y − mean)·componentsᵀ.
Matrix pca_project(const PcaTransform& t, const Matrix& y);

/// FNV-1a over shape and raw value bytes.
std::uint64_t matrix_hash(const Matrix& m);

/// Throws DataError unless `t` was fit on exactly `training`.
void require_fit_on(const PcaTransform& t, const Matrix& training);

/// Population Pearson correlation. Throws DataError for length < 2, unequal
/// lengths, or a constant argument.
double pearson(std::span<const double> x, std::span<const double> y);

/// Distance from p to the upper half circle of radius r (θ ∈ [0, π]),
/// falling back to the nearer endpoint below the x axis.
double arc_distance(double x, double y, double radius);

/// Mean arc_distance of each row to the arc of its class. Rows are 2-D.
double denoising_score(const Matrix& points, std::span<const std::size_t> classes,
                       std::span<const double> radii);

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Per-component quantile overlap. The band is the training 1st–99th
/// percentile; `ratio` divides the generated in-band fraction by the
/// training in-band fraction, so generated = training gives exactly 1.
struct OverlapStat {
    std::vector<double> band_lo;
    std::vector<double> band_hi;
    std::vector<double> generated_fraction;
    std::vector<double> training_fraction;
    std::vector<double> ratio;
};

OverlapStat quantile_overlap(const Matrix& training_scores, const Matrix& generated_scores);

/// Mean of the rows of `points` whose class is c, for each class in [0, n_classes).
Matrix class_centroids(const Matrix& points, std::span<const std::size_t> classes,
                       std::size_t n_classes);

/// Smallest Euclidean distance between any two rows.
double min_pairwise_distance(const Matrix& rows);

}  // namespace holonet
