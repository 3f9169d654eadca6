#include "grad_cases.hpp"

#include "holonet/error.hpp"
#include "holonet/hna.hpp"
#include "holonet/peptide.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace holonet;
using holonet::testing::random_matrix;

namespace {

HnaConfig image_config() {
    HnaConfig c;
    c.input_dim = 784;
    c.output_dim = 784;
    c.num_conditions = 10;
    return c;
}

HnaConfig hrn_config() {
    HnaConfig c;
    c.mode = HnaMode::Regression;
    c.output_dim = 1;
    c.num_conditions = 3;
    c.width = 16;
    c.embedding_dim = 4;
    return c;
}

LabeledDataset blob_data(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    d.inputs = random_matrix(n, dim, 0, 1, rng);
    for (std::size_t i = 0; i < n; ++i) d.conditions.push_back(i % 2);
    d.condition_names = {"a", "b"};
    return d;
}

double max_pairwise(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.cols(); ++k) s += (m(i, k) - m(j, k)) * (m(i, k) - m(j, k));
            best = std::max(best, std::sqrt(s));
        }
    }
    return best;
}

}  // namespace

TEST(HnaConfig, DefaultsFollowTheRecipe) {
    const HnaConfig c = image_config();
    EXPECT_EQ(c.width, 128u);
    EXPECT_EQ(c.observer_depth, 2u);
    EXPECT_EQ(c.backbone_depth, 4u);
    EXPECT_EQ(c.components, 16u);
    EXPECT_EQ(c.backbone_output_activation(), ActivationKind::SineNorm01);
    EXPECT_EQ(c.hidden_bias, BiasPlacement::PostActivation);
    EXPECT_EQ(c.output_bias, BiasPlacement::PreActivation);
}

TEST(HnaConfig, JsonRoundTrip) {
    HnaConfig c = hrn_config();
    c.activation = ActivationKind::Sine10;
    c.extra_noise_std = 0.05;
    const HnaConfig back = hna_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(HnaModel, SkipLayerShapes) {
    Rng rng(1);
    const HnaModel m = make_hna(image_config(), rng);
    ASSERT_EQ(m.observer.size(), 3u);
    EXPECT_EQ(m.observer.back().out_dim(), 1u);
    ASSERT_EQ(m.backbone.size(), 5u);
    EXPECT_EQ(m.backbone[0].weight.cols(), 2 * 16u);  // prior sample is h0
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_EQ(m.backbone[i].weight.rows(), 128u);
        EXPECT_EQ(m.backbone[i].weight.cols(), 256u);
    }
    EXPECT_EQ(m.backbone.back().out_dim(), 784u);
}

TEST(Hgn, ReconstructionShapeRangeAndDeterminism) {
    Rng init(2);
    const HnaModel m = make_hna(image_config(), init);
    Rng data(3);
    const Matrix x = random_matrix(1, 784, 0, 1, data);
    Rng a(4), b(4);
    const Matrix y = hgn_forward(m, x.values(), 3, a);
    ASSERT_EQ(y.cols(), 784u);
    for (double v : y.values()) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
    EXPECT_EQ(y, hgn_forward(m, x.values(), 3, b));
}

TEST(Hgn, RejectsBadInputs) {
    Rng init(2);
    const HnaModel m = make_hna(image_config(), init);
    Rng rng(1);
    EXPECT_THROW(hgn_forward(m, std::vector<double>(10, 0.0), 0, rng), ShapeError);
    EXPECT_THROW(hgn_forward(m, std::vector<double>(784, 0.0), 10, rng), DataError);
}

TEST(Hgn, ObserverBoundedBySine) {
    Rng init(5);
    HnaConfig c = image_config();
    c.activation = ActivationKind::Sine10;
    const HnaModel m = make_hna(c, init);
    Rng data(6);
    HnaBatch b{random_matrix(20, 784, 0, 1, data), std::vector<std::size_t>(20, 0)};
    const Matrix o = observe(m, b);
    ASSERT_EQ(o.cols(), 1u);
    for (double v : o.values()) EXPECT_LE(std::abs(v), 10.0);
}

TEST(Fss, Grids) {
    EXPECT_EQ(fss_grid({-1, 1}, 3), (std::vector<double>{-1, 0, 1}));
    EXPECT_EQ(fss_grid({-1, 1}, 2), (std::vector<double>{-1, 1}));
    EXPECT_EQ(fss_grid({-10, 10}, 5), (std::vector<double>{-10, -5, 0, 5, 10}));
    EXPECT_THROW(fss_grid({-1, 1}, 1), ConfigError);
}

TEST(Fss, AscendingAndSymmetric) {
    for (std::size_t n : {2u, 7u, 100u, 101u}) {
        const auto v = fss_grid({-1, 1}, n);
        for (std::size_t i = 0; i + 1 < n; ++i) EXPECT_LT(v[i], v[i + 1]);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(v[i], -v[n - 1 - i]);
    }
}

TEST(Fss, SweepsTheObserverRange) {
    Rng init(1);
    HnaConfig c = image_config();
    c.activation = ActivationKind::Sine10;
    const HnaModel m = make_hna(c, init);
    Rng rng(2);
    const FssResult r = fss_sample(m, 0, 5, rng);
    EXPECT_EQ(r.skip_values, (std::vector<double>{-10, -5, 0, 5, 10}));
    EXPECT_EQ(r.outputs.rows(), 5u);
    EXPECT_EQ(r.outputs.cols(), 784u);
}

TEST(Fss, BothPathwaysAreLive) {
    HnaModel m = holonet::testing::tiny_hna(HnaMode::Generative, 4);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 8;
    train(m, blob_data(32, 3, 1), tc);
    Rng rng(3);
    const FssResult frozen = fss_sample(m, 0, 10, rng);
    EXPECT_GT(max_pairwise(frozen.outputs), 0.0);

    // Fixed skip scalar, fresh prior draws.
    Matrix outs(10, 3);
    const Matrix skip(1, 1, 0.25);
    for (std::size_t i = 0; i < 10; ++i) {
        const std::size_t cond[] = {0};
        const PriorNoise noise = draw_prior_noise(m.prior, cond, rng);
        ad::Graph g;
        ParamNodes params(g);
        const HnaNodes nodes = build_hna_graph(params, m, HnaBatch{Matrix(0, 0), {0}}, noise, nullptr, &skip);
        g.forward();
        for (std::size_t k = 0; k < 3; ++k) outs(i, k) = g.value(nodes.output)[k];
    }
    EXPECT_GT(max_pairwise(outs), 0.0);
}

TEST(Fss, FrozenPriorIsSharedAcrossTheSweep) {
    HnaConfig c = hrn_config();
    c.mode = HnaMode::Generative;
    c.input_dim = c.output_dim = 2;
    Rng init(9);
    HnaModel m = make_hna(c, init);
    // With the skip weights zeroed, every swept value sees the same backbone input.
    for (auto& layer : m.backbone) {
        const std::size_t half = layer.weight.cols() / 2;
        for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
            for (std::size_t j = half; j < layer.weight.cols(); ++j) layer.weight(r, j) = 0.0;
        }
    }
    Rng rng(1);
    const FssResult r = fss_sample(m, 1, 4, rng);
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_EQ(Matrix::row(r.outputs.row_span(i)), Matrix::row(r.outputs.row_span(0)));
    }
    m.config.fss_redraw_prior = true;
    const FssResult redraw = fss_sample(m, 1, 4, rng);
    EXPECT_NE(Matrix::row(redraw.outputs.row_span(1)), Matrix::row(redraw.outputs.row_span(0)));
}

TEST(Hrn, PredictionsInUnitInterval) {
    Rng init(3);
    const HnaModel m = make_hna(hrn_config(), init);
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::size_t> idx(kPeptideSlots);
        for (auto& i : idx) i = rng.below(kVocabularySize);
        const double y = hrn_predict(m, idx, rng.below(3), rng);
        ASSERT_GE(y, 0.0);
        ASSERT_LE(y, 1.0);
    }
}

TEST(Hrn, AllPadIsFinite) {
    Rng init(3);
    const HnaModel m = make_hna(hrn_config(), init);
    Rng rng(4);
    EXPECT_TRUE(std::isfinite(hrn_predict(m, std::vector<std::size_t>(kPeptideSlots, 0), 0, rng)));
}

TEST(Hrn, PadBeyondLengthIsInvisible) {
    Rng init(3);
    HnaModel m = make_hna(hrn_config(), init);
    ASSERT_EQ(Matrix::row(m.embedding.row_span(kPadIndex)), Matrix(1, 4, 0.0));
    const auto a = encode_peptide("ACDEFGHK");
    auto b = a;
    ASSERT_EQ(b[9], kPadIndex);
    Rng r1(7), r2(7);
    EXPECT_EQ(hrn_predict(m, a, 1, r1), hrn_predict(m, b, 1, r2));
}

TEST(Hrn, FrozenPadStaysZeroDuringTraining) {
    Rng init(3);
    HnaModel m = make_hna(hrn_config(), init);
    LabeledDataset d;
    d.inputs = Matrix(6, kPeptideSlots);
    Rng rng(1);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto idx = encode_peptide(i % 2 ? "ACDEFGHK" : "WYVTSRQPN");
        for (std::size_t p = 0; p < kPeptideSlots; ++p) d.inputs(i, p) = static_cast<double>(idx[p]);
        d.conditions.push_back(i % 3);
    }
    d.targets = std::vector<double>{0.1, 0.9, 0.3, 0.7, 0.5, 0.2};
    d.condition_names = {"x", "y", "z"};
    TrainConfig tc;
    tc.epochs = 3;
    train(m, d, tc);
    EXPECT_EQ(Matrix::row(m.embedding.row_span(kPadIndex)), Matrix(1, 4, 0.0));
}

TEST(Hrn, RejectsBadInputs) {
    Rng init(3);
    const HnaModel m = make_hna(hrn_config(), init);
    Rng rng(1);
    EXPECT_THROW(hrn_predict(m, std::vector<std::size_t>(10, 1), 0, rng), DataError);
    EXPECT_THROW(hrn_predict(m, std::vector<std::size_t>(11, 21), 0, rng), DataError);
}

TEST(Train, ZeroEpochsChangesNothing) {
    HnaModel m = holonet::testing::tiny_hna(HnaMode::Generative, 1);
    const HnaModel before = m;
    TrainConfig tc;
    tc.epochs = 0;
    EXPECT_TRUE(train(m, blob_data(10, 3, 2), tc).empty());
    for (std::size_t i = 0; i < m.backbone.size(); ++i) EXPECT_EQ(m.backbone[i].weight, before.backbone[i].weight);
    EXPECT_EQ(m.prior.mu, before.prior.mu);
}

TEST(Train, DeterministicLossSequence) {
    const LabeledDataset d = blob_data(40, 3, 5);
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 16;
    HnaModel a = holonet::testing::tiny_hna(HnaMode::Generative, 2);
    HnaModel b = holonet::testing::tiny_hna(HnaMode::Generative, 2);
    const auto la = train(a, d, tc);
    const auto lb = train(b, d, tc);
    ASSERT_EQ(la.size(), 4u);
    for (std::size_t i = 0; i < la.size(); ++i) EXPECT_EQ(la[i].loss, lb[i].loss);
}

TEST(Train, LossFallsOnSmallData) {
    HnaConfig c;
    c.input_dim = c.output_dim = 2;
    c.num_conditions = 2;
    c.width = 32;
    Rng init(1);
    HnaModel m = make_hna(c, init);
    const LabeledDataset d = blob_data(200, 2, 3);
    TrainConfig tc;
    tc.epochs = 40;
    tc.batch_size = 32;
    const auto log = train(m, d, tc);
    EXPECT_LT(log.back().loss, log.front().loss);
}

TEST(Train, NonFiniteAbortRestoresParameters) {
    HnaConfig c;
    c.input_dim = c.output_dim = 3;
    c.num_conditions = 2;
    c.width = 4;
    c.activation = ActivationKind::Relu;
    c.output_activation = ActivationKind::Identity;
    Rng init(1);
    HnaModel m = make_hna(c, init);
    TrainConfig tc;
    tc.epochs = 50;
    tc.learning_rate = 1e300;
    EXPECT_THROW(train(m, blob_data(16, 3, 1), tc), NumericalError);
    for (const auto& p : m.parameters()) EXPECT_TRUE(p.value->all_finite()) << p.name;
}

TEST(Train, RejectsUnknownCondition) {
    HnaModel m = holonet::testing::tiny_hna(HnaMode::Generative, 1);
    LabeledDataset d = blob_data(6, 3, 1);
    d.conditions[2] = 2;
    d.condition_names = {"a", "b", "c"};
    EXPECT_THROW(train(m, d, TrainConfig{}), DataError);
}

TEST(EndToEndGradient, TinyGenerativeModel) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = holonet::testing::tiny_hna_grad_check(HnaMode::Generative, seed);
        ASSERT_TRUE(r.finite) << r.location;
        ASSERT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " at " << r.location;
    }
}

TEST(EndToEndGradient, TinyRegressionModel) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = holonet::testing::tiny_hna_grad_check(HnaMode::Regression, seed);
        ASSERT_TRUE(r.finite) << r.location;
        ASSERT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " at " << r.location;
    }
}
