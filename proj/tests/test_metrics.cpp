#include "holonet/error.hpp"
#include "holonet/metrics.hpp"
#include "holonet/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace holonet;

namespace {

Matrix line_points() {
    Matrix x(10, 2);
    for (std::size_t t = 1; t <= 10; ++t) {
        x(t - 1, 0) = static_cast<double>(t);
        x(t - 1, 1) = 2.0 * static_cast<double>(t);
    }
    return x;
}

Matrix gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (auto& v : x.values()) v = rng.normal();
    return x;
}

}  // namespace

TEST(Pca, ExactLine) {
    const PcaTransform t = pca_fit(line_points(), 1);
    EXPECT_NEAR(t.components(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(t.components(0, 1), 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(t.explained_ratio[0], 1.0, 1e-12);
    EXPECT_THROW(pca_fit(line_points(), 2), DataError);
}

TEST(Pca, IsotropicCloudMatchesCovarianceEigenvalues) {
    const Matrix x = gaussian_cloud(10000, 2, 21);
    const PcaTransform t = pca_fit(x, 2);
    // Closed-form eigenvalues of the sample covariance.
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        m0 += x(i, 0);
        m1 += x(i, 1);
    }
    m0 /= x.rows();
    m1 /= x.rows();
    double a = 0, b = 0, c = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        a += (x(i, 0) - m0) * (x(i, 0) - m0);
        b += (x(i, 0) - m0) * (x(i, 1) - m1);
        c += (x(i, 1) - m1) * (x(i, 1) - m1);
    }
    const double tr = a + c, det = a * c - b * b;
    const double l1 = tr / 2 + std::sqrt(tr * tr / 4 - det);
    const double l2 = tr / 2 - std::sqrt(tr * tr / 4 - det);
    EXPECT_NEAR(t.explained_ratio[0], l1 / (l1 + l2), 1e-10);
    EXPECT_NEAR(t.explained_ratio[1], l2 / (l1 + l2), 1e-10);
    EXPECT_NEAR(t.explained_ratio[0], 0.5, 0.05);
    EXPECT_NEAR(t.explained_ratio[1], 0.5, 0.05);
}

TEST(Pca, OrthonormalWithSignConvention) {
    const PcaTransform t = pca_fit(gaussian_cloud(300, 6, 3), 4);
    double ratio_sum = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        ratio_sum += t.explained_ratio[i];
        EXPECT_GE(t.explained_ratio[i], 0.0);
        double biggest = 0;
        for (std::size_t k = 0; k < 6; ++k) {
            if (std::abs(t.components(i, k)) > std::abs(biggest)) biggest = t.components(i, k);
        }
        EXPECT_GT(biggest, 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            double dot = 0;
            for (std::size_t k = 0; k < 6; ++k) dot += t.components(i, k) * t.components(j, k);
            EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-10);
        }
    }
    EXPECT_LE(ratio_sum, 1.0 + 1e-12);
}

TEST(Pca, ProjectionProperties) {
    const Matrix x = gaussian_cloud(50, 5, 8);
    const PcaTransform t = pca_fit(x, 3);
    const Matrix mean_scores = pca_project(t, t.mean);
    for (double v : mean_scores.values()) EXPECT_NEAR(v, 0.0, 1e-14);
    EXPECT_EQ(pca_project(t, x), pca_project(t, x));

    Matrix centered(1, 5), doubled(1, 5);
    for (std::size_t k = 0; k < 5; ++k) {
        centered(0, k) = x(0, k);
        doubled(0, k) = t.mean(0, k) + 2.0 * (x(0, k) - t.mean(0, k));
    }
    const Matrix p1 = pca_project(t, centered), p2 = pca_project(t, doubled);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p2[i], 2.0 * p1[i], 1e-12);
    EXPECT_THROW(pca_project(t, Matrix(1, 4)), DataError);
}

TEST(Pca, FullRankReconstruction) {
    const Matrix x = gaussian_cloud(20, 4, 9);
    const PcaTransform t = pca_fit(x, 4);
    const Matrix s = pca_project(t, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            double v = t.mean(0, k);
            for (std::size_t c = 0; c < 4; ++c) v += s(i, c) * t.components(c, k);
            ASSERT_NEAR(v, x(i, k), 1e-8);
        }
    }
}

TEST(Pca, FitHashGuardsTheTrainingRows) {
    const Matrix x = gaussian_cloud(30, 3, 1);
    const PcaTransform t = pca_fit(x, 2);
    EXPECT_NO_THROW(require_fit_on(t, x));
    Matrix y = x;
    y(0, 0) += 1e-9;
    EXPECT_THROW(require_fit_on(t, y), DataError);
    EXPECT_THROW(pca_fit(Matrix(1, 3), 1), DataError);
}

TEST(Pearson, Examples) {
    const std::vector<double> x{1, 2, 3, 4, 7};
    EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
    std::vector<double> y;
    for (double v : x) y.push_back(-2 * v + 3);
    EXPECT_NEAR(pearson(x, y), -1.0, 1e-15);
    EXPECT_THROW(pearson(x, std::vector<double>(5, 1.0)), DataError);
    EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{2}), DataError);
    EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), DataError);
}

TEST(Pearson, AffineInvariance) {
    Rng rng(5);
    std::vector<double> x(100), y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        x[i] = rng.normal();
        y[i] = x[i] + rng.normal();
    }
    const double r = pearson(x, y);
    std::vector<double> x2 = x, y2 = y;
    for (auto& v : x2) v = 3.5 * v - 10;
    for (auto& v : y2) v = 0.01 * v + 4;
    EXPECT_LT(std::abs(pearson(x2, y2) - r), 1e-12);
}

TEST(ArcDistance, Examples) {
    EXPECT_NEAR(arc_distance(std::cos(1.0) * 2, std::sin(1.0) * 2, 2.0), 0.0, 1e-15);
    EXPECT_NEAR(arc_distance(0, 2.1, 2.0), 0.1, 1e-15);
    EXPECT_NEAR(arc_distance(0, -3, 3.0), 3.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(arc_distance(4, -1, 3.0), std::sqrt(2.0), 1e-12);
}

TEST(DenoisingScore, MeanOfArcDistances) {
    const Matrix p = Matrix::from_rows({{0, 1.1}, {0, 2}, {-3, 0}});
    const std::vector<std::size_t> cls{0, 1, 2};
    EXPECT_NEAR(denoising_score(p, cls, std::vector<double>{1, 2, 3}), 0.1 / 3, 1e-15);
    EXPECT_THROW(denoising_score(p, std::vector<std::size_t>{0, 1, 5}, std::vector<double>{1, 2, 3}),
                 DataError);
}

TEST(Overlap, IdenticalScoresGiveOne) {
    const Matrix s = gaussian_cloud(500, 4, 2);
    const OverlapStat o = quantile_overlap(s, s);
    for (double r : o.ratio) EXPECT_EQ(r, 1.0);
    ASSERT_EQ(o.band_lo.size(), 4u);
}

TEST(Overlap, DisjointScoresGiveZero) {
    const Matrix s = gaussian_cloud(500, 2, 2);
    Matrix far = s;
    for (auto& v : far.values()) v += 100;
    for (double r : quantile_overlap(s, far).ratio) EXPECT_EQ(r, 0.0);
}

TEST(Quantile, LinearInterpolation) {
    EXPECT_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
    EXPECT_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
}

TEST(Centroids, MeansAndSeparation) {
    const Matrix p = Matrix::from_rows({{0, 0}, {2, 0}, {10, 10}, {10, 12}});
    const Matrix c = class_centroids(p, std::vector<std::size_t>{0, 0, 1, 1}, 2);
    EXPECT_EQ(c, Matrix::from_rows({{1, 0}, {10, 11}}));
    EXPECT_NEAR(min_pairwise_distance(c), std::hypot(9.0, 11.0), 1e-12);
}
