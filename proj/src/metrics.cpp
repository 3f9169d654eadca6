#include "holonet/metrics.hpp"

#include "holonet/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace holonet {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

void fnv_mix(std::uint64_t& h, const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

std::uint64_t matrix_hash(const Matrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t shape[2] = {m.rows(), m.cols()};
    fnv_mix(h, shape, sizeof shape);
    fnv_mix(h, m.data(), m.size() * sizeof(double));
    return h;
}

PcaTransform pca_fit(const Matrix& x, std::size_t n_components) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw DataError("PCA needs at least 2 rows, got " + std::to_string(n));
    if (n_components == 0 || n_components > std::min(n, d)) {
        throw DataError("n_components " + std::to_string(n_components) + " outside [1, " +
                        std::to_string(std::min(n, d)) + "]");
    }
    if (!x.all_finite()) throw DataError("PCA input contains non-finite values");

    PcaTransform t;
    t.fit_hash = matrix_hash(x);
    t.mean = Matrix(1, d);
    const auto xv = view(x);
    Eigen::RowVectorXd mean = xv.colwise().mean();
    std::copy(mean.data(), mean.data() + d, t.mean.data());
    const Eigen::MatrixXd centered = xv.rowwise() - mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon() *
                       (s.size() > 0 ? s(0) : 0.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > tol ? 1 : 0;
    if (rank < n_components) {
        throw DataError("data has numerical rank " + std::to_string(rank) + ", fewer than the " +
                        std::to_string(n_components) + " requested components");
    }

    const double total = s.squaredNorm();
    t.components = Matrix(n_components, d);
    for (std::size_t k = 0; k < n_components; ++k) {
        Eigen::VectorXd axis = svd.matrixV().col(static_cast<Eigen::Index>(k));
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0) axis = -axis;
        for (std::size_t j = 0; j < d; ++j) t.components(k, j) = axis(static_cast<Eigen::Index>(j));
        t.explained_ratio.push_back(s(static_cast<Eigen::Index>(k)) * s(static_cast<Eigen::Index>(k)) / total);
    }
    return t;
}

Matrix pca_project(const PcaTransform& t, const Matrix& y) {
    if (y.cols() != t.dim()) {
        throw DataError("projection input has " + std::to_string(y.cols()) + " columns, PCA was fit on " +
                        std::to_string(t.dim()));
    }
    Matrix out(y.rows(), t.n_components());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t k = 0; k < t.n_components(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < t.dim(); ++j) acc += (y(i, j) - t.mean[j]) * t.components(k, j);
            out(i, k) = acc;
        }
    }
    return out;
}

void require_fit_on(const PcaTransform& t, const Matrix& training) {
    if (matrix_hash(training) != t.fit_hash) {
        throw DataError("PCA transform was not fit on the given training rows");
    }
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("pearson arguments differ in length");
    if (x.size() < 2) throw DataError("pearson needs at least 2 values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("correlation is undefined for a constant vector");
    const double r = (sxy / n) / (std::sqrt(sxx / n) * std::sqrt(syy / n));
    return std::clamp(r, -1.0, 1.0);
}

double arc_distance(double x, double y, double radius) {
    if (y >= 0.0) return std::abs(std::hypot(x, y) - radius);
    return std::min(std::hypot(x - radius, y), std::hypot(x + radius, y));
}

double denoising_score(const Matrix& points, std::span<const std::size_t> classes,
                       std::span<const double> radii) {
    if (points.cols() != 2) throw DataError("denoising score needs 2-D points");
    if (classes.size() != points.rows()) throw DataError("one class label per point is required");
    if (points.rows() == 0) throw DataError("no points to score");
    double sum = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        if (classes[i] >= radii.size()) {
            throw DataError("class " + std::to_string(classes[i]) + " has no arc");
        }
        sum += arc_distance(points(i, 0), points(i, 1), radii[classes[i]]);
    }
    return sum / static_cast<double>(points.rows());
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

OverlapStat quantile_overlap(const Matrix& training_scores, const Matrix& generated_scores) {
    if (training_scores.cols() != generated_scores.cols()) {
        throw DataError("training and generated scores differ in width");
    }
    if (training_scores.rows() == 0 || generated_scores.rows() == 0) {
        throw DataError("overlap needs non-empty score tables");
    }
    auto in_band_fraction = [](const Matrix& m, std::size_t col, double lo, double hi) {
        std::size_t inside = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) inside += (m(i, col) >= lo && m(i, col) <= hi) ? 1 : 0;
        return static_cast<double>(inside) / static_cast<double>(m.rows());
    };
    OverlapStat s;
    for (std::size_t c = 0; c < training_scores.cols(); ++c) {
        std::vector<double> column(training_scores.rows());
        for (std::size_t i = 0; i < column.size(); ++i) column[i] = training_scores(i, c);
        const double lo = quantile(column, 0.01);
        const double hi = quantile(column, 0.99);
        const double gen = in_band_fraction(generated_scores, c, lo, hi);
        const double train = in_band_fraction(training_scores, c, lo, hi);
        s.band_lo.push_back(lo);
        s.band_hi.push_back(hi);
        s.generated_fraction.push_back(gen);
        s.training_fraction.push_back(train);
        s.ratio.push_back(train > 0 ? gen / train : 0.0);
    }
    return s;
}

Matrix class_centroids(const Matrix& points, std::span<const std::size_t> classes, std::size_t n_classes) {
    if (classes.size() != points.rows()) throw DataError("one class label per point is required");
    Matrix sums(n_classes, points.cols());
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        if (classes[i] >= n_classes) throw DataError("class label out of range");
        ++counts[classes[i]];
        for (std::size_t j = 0; j < points.cols(); ++j) sums(classes[i], j) += points(i, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (counts[c] == 0) throw DataError("class " + std::to_string(c) + " has no points");
        for (std::size_t j = 0; j < points.cols(); ++j) sums(c, j) /= static_cast<double>(counts[c]);
    }
    return sums;
}

double min_pairwise_distance(const Matrix& rows) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < rows.rows(); ++a) {
        for (std::size_t b = a + 1; b < rows.rows(); ++b) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < rows.cols(); ++j) {
                const double d = rows(a, j) - rows(b, j);
                d2 += d * d;
            }
            best = std::min(best, std::sqrt(d2));
        }
    }
    return best;
}

}  // namespace holonet
