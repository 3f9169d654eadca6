#include "grad_cases.hpp"

#include "holonet/activation.hpp"
#include "holonet/adagrad.hpp"
#include "holonet/error.hpp"
#include "holonet/hna.hpp"
#include "holonet/layers.hpp"
#include "holonet/prior.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace holonet;
using holonet::testing::random_matrix;

namespace {

DenseLayer layer_of(Matrix w, Matrix b, ActivationKind f, BiasPlacement p) {
    return DenseLayer{std::move(w), std::move(b), f, p};
}

}  // namespace

TEST(Activation, KnownValues) {
    EXPECT_DOUBLE_EQ(activate(ActivationKind::Sigmoid, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(activate(ActivationKind::Tanh, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(activate(ActivationKind::Relu, -1.0), 0.0);
    EXPECT_DOUBLE_EQ(activate(ActivationKind::LeakyRelu, -1.0), -0.01);
    EXPECT_DOUBLE_EQ(activate(ActivationKind::SineNorm01, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(activate(ActivationKind::Sine10, M_PI / 2), 10.0);
    EXPECT_DOUBLE_EQ(activate_derivative(ActivationKind::Relu, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(activate_derivative(ActivationKind::Sigmoid, 0.0), 0.25);
    EXPECT_DOUBLE_EQ(activate_derivative(ActivationKind::Sine, 0.0), 1.0);
}

TEST(Activation, RangesHoldOnRandomInputs) {
    Rng rng(1);
    for (auto kind : {ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Sine, ActivationKind::SineNorm01,
                      ActivationKind::Sine10}) {
        const auto range = activation_range(kind);
        ASSERT_TRUE(range.has_value()) << to_string(kind);
        for (int i = 0; i < 100000; ++i) {
            const double y = activate(kind, rng.uniform(-50, 50));
            ASSERT_GE(y, range->lo) << to_string(kind);
            ASSERT_LE(y, range->hi) << to_string(kind);
        }
    }
    EXPECT_FALSE(activation_range(ActivationKind::Relu).has_value());
}

TEST(Activation, NamesRoundTrip) {
    for (auto kind : {ActivationKind::Identity, ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Relu,
                      ActivationKind::LeakyRelu, ActivationKind::Sine, ActivationKind::SineNorm01,
                      ActivationKind::Sine10}) {
        EXPECT_EQ(activation_from_string(to_string(kind)), kind);
    }
    EXPECT_THROW(activation_from_string("swish"), ConfigError);
}

TEST(Glorot, Limits) {
    EXPECT_DOUBLE_EQ(glorot_limit(3, 3), 1.0);
    // sqrt(6/256) evaluated to 30 digits with mpmath.
    EXPECT_NEAR(glorot_limit(128, 128), 0.153093108923948631, 1e-15);
}

TEST(Glorot, EntriesWithinLimitAndDeterministic) {
    Rng a(9), b(9);
    const Matrix m = glorot_init(3, 3, a);
    EXPECT_EQ(m.rows(), 3u);
    for (double v : m.values()) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(m, glorot_init(3, 3, b));
    EXPECT_THROW(glorot_init(0, 3, a), ConfigError);
}

TEST(DenseSkip, SelectionMatrixExample) {
    const auto l = layer_of(Matrix::from_rows({{1, 0, 0, 0}, {0, 0, 1, 0}}), Matrix::row({0, 0}), ActivationKind::Relu,
                            BiasPlacement::PostActivation);
    EXPECT_EQ(dense_skip_forward(Matrix::row({1, 0}), 0.5, l), Matrix::row({1, 0.5}));
}

TEST(DenseSkip, BiasOutsideActivation) {
    const auto l = layer_of(Matrix(2, 4, 0.0), Matrix::row({0.3, 0.3}), ActivationKind::Relu,
                            BiasPlacement::PostActivation);
    EXPECT_EQ(dense_skip_forward(Matrix::row({0.7, -2}), 0.0, l), Matrix::row({0.3, 0.3}));
}

TEST(DenseSkip, NormalizedSineStaysInUnitInterval) {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const auto l = layer_of(random_matrix(3, 6, -5, 5, rng), random_matrix(1, 3, -5, 5, rng),
                                ActivationKind::SineNorm01, BiasPlacement::PreActivation);
        const Matrix y = dense_skip_forward(random_matrix(1, 3, -5, 5, rng), rng.uniform(-1, 1), l);
        for (double v : y.values()) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(DenseSkip, MatchesReferenceFormula) {
    Rng rng(12);
    for (std::size_t n : {1u, 2u, 4u, 8u}) {
        for (auto placement : {BiasPlacement::PostActivation, BiasPlacement::PreActivation}) {
            for (int t = 0; t < 25; ++t) {
                const Matrix w = random_matrix(n, 2 * n, -1, 1, rng);
                const Matrix b = random_matrix(1, n, -1, 1, rng);
                const Matrix h = random_matrix(1, n, -1, 1, rng);
                const double o = rng.uniform(-1, 1);
                const auto l = layer_of(w, b, ActivationKind::Sine, placement);
                const Matrix y = dense_skip_forward(h, o, l);
                for (std::size_t i = 0; i < n; ++i) {
                    double z = 0.0;
                    for (std::size_t j = 0; j < n; ++j) z += w(i, j) * h[j] + w(i, n + j) * o;
                    const double expect = placement == BiasPlacement::PostActivation ? std::sin(z) + b[i]
                                                                                      : std::sin(z + b[i]);
                    ASSERT_NEAR(y[i], expect, 1e-12);
                }
            }
        }
    }
}

TEST(DenseSkip, WidthMismatchThrows) {
    const auto l = layer_of(Matrix(2, 3), Matrix(1, 2), ActivationKind::Relu, BiasPlacement::PostActivation);
    EXPECT_THROW(dense_skip_forward(Matrix::row({1, 0}), 0.5, l), ShapeError);
}

TEST(DenseSkip, GraphNodeAgreesWithRowForm) {
    Rng rng(8);
    const auto l = layer_of(random_matrix(3, 6, -1, 1, rng), random_matrix(1, 3, -1, 1, rng), ActivationKind::Tanh,
                            BiasPlacement::PostActivation);
    const Matrix h = random_matrix(2, 3, -1, 1, rng);
    const Matrix o = random_matrix(2, 1, -1, 1, rng);
    ad::Graph g;
    ParamNodes params(g);
    const auto y = dense_skip_node(params, l, "skip", g.constant(h), g.constant(o));
    g.forward();
    for (std::size_t r = 0; r < 2; ++r) {
        const Matrix row = dense_skip_forward(Matrix::row(h.row_span(r)), o[r], l);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g.value(y)(r, i), row[i], 1e-14);
    }
}

TEST(Dense, Examples) {
    EXPECT_EQ(dense_forward(Matrix::row({0}),
                            layer_of(Matrix::identity(1), Matrix::row({0}), ActivationKind::Tanh,
                                     BiasPlacement::PreActivation)),
              Matrix::row({0}));
    EXPECT_EQ(dense_forward(Matrix::row({0}),
                            layer_of(Matrix::identity(1), Matrix::row({0}), ActivationKind::Sigmoid,
                                     BiasPlacement::PreActivation)),
              Matrix::row({0.5}));
    EXPECT_EQ(dense_forward(Matrix::row({-1}),
                            layer_of(Matrix::row({2}), Matrix::row({1}), ActivationKind::Relu,
                                     BiasPlacement::PreActivation)),
              Matrix::row({0}));
    EXPECT_THROW(dense_forward(Matrix::row({1, 2}), layer_of(Matrix::identity(1), Matrix::row({0}),
                                                              ActivationKind::Relu, BiasPlacement::PreActivation)),
                 ShapeError);
}

TEST(MseLoss, Examples) {
    const Matrix t = Matrix::row({0.2, -1, 3});
    EXPECT_EQ(mse_loss(t, t), 0.0);
    EXPECT_DOUBLE_EQ(mse_loss(Matrix::row({1, 0}), Matrix::row({0, 0})), 0.5);
    const Matrix p = Matrix::row({1, 0.5, 2});
    Matrix p2(1, 3);
    for (int i = 0; i < 3; ++i) p2[i] = t[i] + 2 * (p[i] - t[i]);
    EXPECT_NEAR(mse_loss(p2, t), 4 * mse_loss(p, t), 1e-14);
    EXPECT_THROW(mse_loss(Matrix(1, 2), Matrix(2, 1)), ShapeError);
}

TEST(Adagrad, SingleStepExample) {
    Matrix theta = Matrix::row({1.0});
    const Matrix g = Matrix::row({0.5});
    std::vector<ParamRef> params{{"theta", &theta}};
    const Matrix* grads[] = {&g};
    AdagradState s;
    adagrad_step(params, grads, s);
    EXPECT_DOUBLE_EQ(s.accumulators.at("theta")[0], 0.25);
    EXPECT_NEAR(theta[0], 1.0 - 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
    EXPECT_NEAR(theta[0], 0.99, 1e-9);
}

TEST(Adagrad, ZeroGradientLeavesEverything) {
    Matrix theta = Matrix::row({0.3, -2});
    const Matrix g(1, 2, 0.0);
    std::vector<ParamRef> params{{"theta", &theta}};
    const Matrix* grads[] = {&g};
    AdagradState s;
    adagrad_step(params, grads, s);
    EXPECT_EQ(theta, Matrix::row({0.3, -2}));
    EXPECT_EQ(s.accumulators.at("theta"), Matrix(1, 2, 0.0));
}

TEST(Adagrad, StepsShrinkForConstantGradient) {
    Matrix theta = Matrix::row({0.0});
    const Matrix g = Matrix::row({1.0});
    std::vector<ParamRef> params{{"theta", &theta}};
    const Matrix* grads[] = {&g};
    AdagradState s;
    double prev_step = std::numeric_limits<double>::infinity();
    double prev_acc = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double before = theta[0];
        adagrad_step(params, grads, s);
        const double step = std::abs(theta[0] - before);
        EXPECT_LT(step, prev_step);
        EXPECT_GE(s.accumulators.at("theta")[0], prev_acc);
        prev_step = step;
        prev_acc = s.accumulators.at("theta")[0];
    }
}

TEST(Adagrad, NonFiniteGradientAbortsBeforeAnyUpdate) {
    Matrix a = Matrix::row({1.0}), b = Matrix::row({2.0});
    const Matrix ga = Matrix::row({0.1}), gb = Matrix::row({std::nan("")});
    std::vector<ParamRef> params{{"a", &a}, {"b", &b}};
    const Matrix* grads[] = {&ga, &gb};
    AdagradState s;
    try {
        adagrad_step(params, grads, s);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find('b'), std::string::npos);
    }
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(b[0], 2.0);
}

TEST(Prior, InitShapeRangeAndDeterminism) {
    Rng a(3), b(3);
    const MixturePrior p = init_prior(10, 16, a);
    EXPECT_EQ(p.mu.rows(), 10u);
    EXPECT_EQ(p.mu.cols(), 16u);
    for (double v : p.mu.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    for (double v : p.sigma_raw.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    const MixturePrior q = init_prior(10, 16, b);
    EXPECT_EQ(p.mu, q.mu);
    EXPECT_EQ(p.sigma_raw, q.sigma_raw);
}

TEST(Prior, DegenerateSigmaReturnsMean) {
    Rng rng(2);
    MixturePrior p = init_prior(3, 16, rng);
    p.sigma_raw.fill(0.0);
    EXPECT_GT(p.sigma(1, 4), 0.0);
    const Matrix s = sample_prior(p, 1, rng);
    ASSERT_EQ(s.cols(), 16u);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(s[k], p.mu(1, k), 1e-5);
}

TEST(Prior, SameSeedSameSample) {
    Rng init(1);
    const MixturePrior p = init_prior(2, 4, init);
    Rng a(5), b(5);
    EXPECT_EQ(sample_prior(p, 1, a), sample_prior(p, 1, b));
    EXPECT_THROW(sample_prior(p, 2, a), DataError);
}

TEST(Prior, IidDrawsHaveConfiguredWidth) {
    Rng rng(1);
    const MixturePrior p = init_prior(2, 16, rng, SampleMode::IidMixtureDraws, 7);
    EXPECT_EQ(sample_prior(p, 0, rng).cols(), 7u);
}

TEST(Prior, SampleGradientSelectsOwnComponent) {
    Rng rng(4);
    const MixturePrior p = init_prior(2, 3, rng);
    const std::size_t conds[] = {1};
    const PriorNoise noise = draw_prior_noise(p, conds, rng);
    for (std::size_t k = 0; k < 3; ++k) {
        ad::Graph g;
        ParamNodes params(g);
        const auto s = prior_sample_node(params, p, noise);
        g.forward();
        Matrix seed(1, 3, 0.0);
        seed[k] = 1.0;
        g.backward_with_seed(s, seed);
        const Matrix& dmu = g.grad(params.ids().at(&p.mu));
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(dmu(c, j), c == 1 && j == k ? 1.0 : 0.0);
        }
    }
}

TEST(Prior, ReparameterizationGradCheck) {
    Rng rng(6);
    for (auto mode : {SampleMode::VectorPerGaussian, SampleMode::IidMixtureDraws}) {
        const MixturePrior p = init_prior(3, 4, rng, mode, 5);
        const std::size_t conds[] = {0, 2, 2};
        const PriorNoise noise = draw_prior_noise(p, conds, rng);
        const auto r = ad::grad_check(
            [&](ad::Graph& g, std::span<const ad::NodeId> x) {
                return g.gaussian_reparam(x[0], x[1], g.constant(noise.eps), noise.gather);
            },
            {p.mu, p.sigma_raw});
        EXPECT_LT(r.max_rel_error, 1e-4);
    }
}

TEST(Prior, EmpiricalMean) {
    Rng rng(10);
    const MixturePrior p = init_prior(2, 3, rng);
    const int n = 100000;
    std::vector<double> sum(3, 0.0);
    for (int i = 0; i < n; ++i) {
        const Matrix s = sample_prior(p, 1, rng);
        for (std::size_t k = 0; k < 3; ++k) sum[k] += s[k];
    }
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(sum[k] / n, p.mu(1, k), 3 * p.sigma(1, k) / std::sqrt(double(n)));
    }
}

TEST(Prior, TrainingOneConditionLeavesOthersUntouched) {
    HnaModel model = holonet::testing::tiny_hna(HnaMode::Generative, 3);
    LabeledDataset d;
    Rng rng(2);
    d.inputs = random_matrix(12, 3, 0, 1, rng);
    d.conditions.assign(12, 0);
    d.condition_names = {"a", "b"};
    const MixturePrior before = model.prior;
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 4;
    train(model, d, tc);
    EXPECT_NE(Matrix::row(model.prior.mu.row_span(0)), Matrix::row(before.mu.row_span(0)));
    EXPECT_EQ(Matrix::row(model.prior.mu.row_span(1)), Matrix::row(before.mu.row_span(1)));
    EXPECT_EQ(Matrix::row(model.prior.sigma_raw.row_span(1)), Matrix::row(before.sigma_raw.row_span(1)));
}
