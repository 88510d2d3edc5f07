#include "evacc/autodiff.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "evacc/special.hpp"
#include "network_checks.hpp"

using namespace evacc;
using evacc::testing::worst_gradcheck;

namespace {

constexpr int kPoints = 100;
constexpr double kPrimitiveTol = 1e-4;

}  // namespace

// ---- forward semantics ------------------------------------------------------

TEST(Linear, IdentityAndBiasOnly) {
  ad::Tape tape;
  const auto x = tape.constant(std::vector<double>{1.5, -2.0, 3.0});
  ad::Parameter eye{"w", 3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, std::vector<double>(9)};
  ad::Parameter zero_b{"b", 3, 1, {0, 0, 0}, std::vector<double>(3)};
  const auto y = ad::linear(x, tape.param(eye), tape.param(zero_b));
  EXPECT_EQ(std::vector<double>(y.value().begin(), y.value().end()),
            (std::vector<double>{1.5, -2.0, 3.0}));

  ad::Parameter zero_w{"w", 2, 3, std::vector<double>(6, 0.0), std::vector<double>(6)};
  ad::Parameter c{"c", 2, 1, {4.0, -1.0}, std::vector<double>(2)};
  const auto z = ad::linear(x, tape.param(zero_w), tape.param(c));
  EXPECT_EQ(z.value()[0], 4.0);
  EXPECT_EQ(z.value()[1], -1.0);
}

TEST(Linear, ShapeMismatchThrows) {
  ad::Tape tape;
  Rng rng(1);
  ad::ParameterStore s;
  auto& w = s.add_matrix("w", 2, 3, rng);
  auto& b = s.add_vector("b", 2);
  auto& b3 = s.add_vector("b3", 3);
  EXPECT_THROW(ad::linear(tape.constant(std::vector<double>(4)), tape.param(w), tape.param(b)),
               std::invalid_argument);
  EXPECT_THROW(ad::linear(tape.constant(std::vector<double>(3)), tape.param(w), tape.param(b3)),
               std::invalid_argument);
  EXPECT_THROW(ad::add(tape.constant(std::vector<double>(2)), tape.constant(std::vector<double>(3))),
               std::invalid_argument);
}

TEST(Relu, ValuesAndDerivatives) {
  ad::ParameterStore s;
  auto& p = s.add_vector("x", 2);
  p.value = {2.0, -3.0};
  ad::Tape tape;
  const auto y = ad::relu(tape.param(p));
  EXPECT_EQ(y.value()[0], 2.0);
  EXPECT_EQ(y.value()[1], 0.0);
  tape.backward(ad::sum(y));
  EXPECT_EQ(p.grad, (std::vector<double>{1.0, 0.0}));
}

TEST(Softmax, UniformAndShiftInvariant) {
  ad::Tape tape;
  for (double v : ad::softmax(tape.constant(std::vector<double>(11, 0.0))).value()) {
    EXPECT_DOUBLE_EQ(v, 1.0 / 11.0);
  }
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(11);
    for (double& v : x) v = n(gen);
    auto shifted = x;
    for (double& v : shifted) v += 123.0;
    const auto a = ad::softmax(tape.constant(x)).value();
    const auto b = ad::softmax(tape.constant(shifted)).value();
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Softplus, KnownValues) {
  ad::Tape tape;
  EXPECT_NEAR(ad::softplus(tape.constant(0.0)).scalar(), std::log(2.0), 1e-15);
  EXPECT_NEAR(ad::softplus(tape.constant(30.0)).scalar(), 30.0, 1e-12);
  EXPECT_NEAR(ad::softplus(tape.constant(800.0)).scalar(), 800.0, 1e-12);
  EXPECT_NEAR(ad::softplus(tape.constant(-800.0)).scalar(), 0.0, 1e-300);
}

TEST(ElmanCell, ZeroWeightsAndPassthrough) {
  Rng rng(2);
  ad::ParameterStore s;
  auto& w_ih = s.add_matrix("w_ih", 3, 2, rng);
  auto& w_hh = s.add_matrix("w_hh", 3, 3, rng);
  auto& b_ih = s.add_vector("b_ih", 3);
  auto& b_hh = s.add_vector("b_hh", 3);
  std::fill(w_ih.value.begin(), w_ih.value.end(), 0.0);
  std::fill(w_hh.value.begin(), w_hh.value.end(), 0.0);
  ad::Tape tape;
  const auto x = tape.constant(std::vector<double>{0.3, -1.2});
  const auto h = tape.constant(std::vector<double>{0.5, 0.0, 2.0});
  const auto step = [&] {
    return ad::elman_cell(x, h, tape.param(w_ih), tape.param(b_ih), tape.param(w_hh),
                          tape.param(b_hh));
  };
  for (double v : step().value()) EXPECT_EQ(v, 0.0);
  w_hh.value = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const auto out = step().value();
  EXPECT_EQ(std::vector<double>(out.begin(), out.end()), (std::vector<double>{0.5, 0.0, 2.0}));
}

TEST(Categorical, EntropyAndLogprob) {
  ad::Tape tape;
  const auto uniform = tape.constant(std::vector<double>(11, 1.0 / 11.0));
  const auto t = ad::categorical_logprob_entropy(uniform, 4);
  EXPECT_NEAR(t.entropy.scalar(), 2.3978952727983707, 1e-12);
  EXPECT_NEAR(t.logprob.scalar(), -std::log(11.0), 1e-12);

  std::vector<double> peaked(11, 1e-9 / 10.0);
  peaked[2] = 1.0 - 1e-9;
  EXPECT_NEAR(ad::categorical_logprob_entropy(tape.constant(peaked), 2).entropy.scalar(), 0.0, 1e-6);
  EXPECT_THROW(ad::categorical_logprob_entropy(uniform, 11), std::out_of_range);
  EXPECT_THROW(ad::categorical_logprob_entropy(uniform, -1), std::out_of_range);
}

TEST(BetaLogprob, KnownValues) {
  ad::Tape tape;
  const auto one = tape.constant(std::vector<double>{1.0, 1.0, 1.0});
  const auto lp = ad::beta_logprob(one, one, std::vector<double>{0.1, 0.5, 0.93});
  for (double v : lp.value()) EXPECT_NEAR(v, 0.0, 1e-12);

  const auto two = tape.constant(2.0);
  EXPECT_NEAR(ad::beta_logprob(two, two, std::vector<double>{0.5}).scalar(), std::log(1.5), 1e-12);
  EXPECT_NEAR(ad::beta_logprob(two, tape.constant(5.0), std::vector<double>{0.3}).scalar(),
              0.7705248015812898, 1e-12);  // scipy.stats.beta(2, 5).logpdf(0.3)
}

TEST(BetaLogprob, Symmetry) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> conc(0.5, 20.0);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  ad::Tape tape;
  for (int k = 0; k < 100; ++k) {
    const double a = conc(gen);
    const double b = conc(gen);
    const double x = unit(gen);
    EXPECT_NEAR(ad::beta_logprob(tape.constant(a), tape.constant(b), std::vector<double>{x}).scalar(),
                ad::beta_logprob(tape.constant(b), tape.constant(a), std::vector<double>{1 - x}).scalar(),
                1e-10);
  }
}

TEST(BetaLogprob, ClampsEndpointsAndRejectsOutsideValues) {
  ad::Tape tape;
  const auto a = tape.constant(2.0);
  const auto b = tape.constant(3.0);
  EXPECT_TRUE(std::isfinite(ad::beta_logprob(a, b, std::vector<double>{0.0}).scalar()));
  EXPECT_TRUE(std::isfinite(ad::beta_logprob(a, b, std::vector<double>{1.0}).scalar()));
  EXPECT_THROW(ad::beta_logprob(a, b, std::vector<double>{1.2}), std::invalid_argument);
  EXPECT_THROW(ad::beta_logprob(a, b, std::vector<double>{-0.5}), std::invalid_argument);
}

TEST(BetaLogprob, DensityIntegratesToOne) {
  // Midpoint rule on 10^4 cells of (0, 1).
  const int cells = 10'000;
  std::vector<double> xs(cells);
  for (int i = 0; i < cells; ++i) xs[static_cast<std::size_t>(i)] = (i + 0.5) / cells;
  for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {2.0, 5.0}, {5.0, 2.0}, {3.5, 7.25}}) {
    ad::Tape tape;
    const auto alpha = tape.constant(std::vector<double>(cells, a));
    const auto beta = tape.constant(std::vector<double>(cells, b));
    double mass = 0.0;
    for (double lp : ad::beta_logprob(alpha, beta, xs).value()) mass += std::exp(lp) / cells;
    EXPECT_NEAR(mass, 1.0, 1e-3) << "Beta(" << a << ", " << b << ")";
  }
}

TEST(BetaEntropy, ReferenceValues) {
  // scipy.stats.beta(a, b).entropy()
  ad::Tape tape;
  EXPECT_NEAR(ad::beta_entropy(tape.constant(1.0), tape.constant(1.0)).scalar(), 0.0, 1e-12);
  EXPECT_NEAR(ad::beta_entropy(tape.constant(2.0), tape.constant(5.0)).scalar(),
              -0.48453071499548805, 1e-10);
  EXPECT_NEAR(ad::beta_entropy(tape.constant(0.7), tape.constant(3.2)).scalar(),
              -0.7528385804902467, 1e-10);
}

TEST(BetaEntropy, MatchesNumericalIntegral) {
  const int cells = 200'000;
  for (auto [a, b] : {std::pair{2.0, 2.0}, {3.0, 9.0}, {1.5, 1.2}}) {
    double h = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double x = (i + 0.5) / cells;
      const double lp = (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - special::log_beta(a, b);
      h -= std::exp(lp) * lp / cells;
    }
    ad::Tape tape;
    EXPECT_NEAR(ad::beta_entropy(tape.constant(a), tape.constant(b)).scalar(), h, 1e-6);
  }
}

TEST(BetaSample, MeansAndSupport) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 5.0}, {5.0, 2.0}, {0.5, 0.5}}) {
    Rng rng(17);
    const int n = 100'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = ad::beta_sample(a, b, rng);
      ASSERT_GT(x, 0.0);
      ASSERT_LT(x, 1.0);
      sum += x;
    }
    EXPECT_NEAR(sum / n, a / (a + b), 0.01) << "Beta(" << a << ", " << b << ")";
  }
}

TEST(BetaSample, VarianceMatches) {
  Rng rng(23);
  const double a = 2.0;
  const double b = 5.0;
  const int n = 100'000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ad::beta_sample(a, b, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(var, a * b / ((a + b) * (a + b) * (a + b + 1)), 1e-3);
}

// ---- backward ---------------------------------------------------------------

TEST(Backward, QuadraticForm) {
  ad::ParameterStore s;
  auto& theta = s.add_vector("theta", 2);
  theta.value = {1.0, 2.0};
  ad::Tape tape;
  const auto t = tape.param(theta);
  tape.backward(ad::dot(t, t));
  EXPECT_EQ(theta.grad, (std::vector<double>{2.0, 4.0}));
}

TEST(Backward, IndependentLossLeavesZeroGradient) {
  ad::ParameterStore s;
  auto& theta = s.add_vector("theta", 2);
  theta.value = {1.0, 2.0};
  ad::Tape tape;
  tape.param(theta);
  tape.backward(ad::square(tape.constant(3.0)));
  EXPECT_EQ(theta.grad, (std::vector<double>{0.0, 0.0}));
}

TEST(Backward, GradientsAccumulateAcrossBackwardCalls) {
  ad::ParameterStore s;
  auto& theta = s.add_vector("theta", 1);
  theta.value = {3.0};
  for (int i = 0; i < 2; ++i) {
    ad::Tape tape;
    tape.backward(ad::square(tape.param(theta)));
  }
  EXPECT_EQ(theta.grad[0], 12.0);
  s.zero_grad();
  EXPECT_EQ(theta.grad[0], 0.0);
}

TEST(Backward, Errors) {
  ad::Tape tape;
  ad::Tape other;
  EXPECT_THROW(tape.backward(tape.constant(std::vector<double>{1.0, 2.0})), std::invalid_argument);
  EXPECT_THROW(tape.backward(other.constant(1.0)), std::invalid_argument);
}

// ---- finite-difference checks of every primitive -----------------------------

class PrimitiveGradcheck : public ::testing::TestWithParam<evacc::testing::PrimitiveCheck> {};

TEST_P(PrimitiveGradcheck, MatchesCentralDifferences) {
  const auto& c = GetParam();
  EXPECT_LT(worst_gradcheck(c.shapes, c.forward, kPoints, c.seed, c.floor), kPrimitiveTol);
}

INSTANTIATE_TEST_SUITE_P(All, PrimitiveGradcheck, ::testing::ValuesIn(evacc::testing::primitive_checks()),
                         [](const auto& info) { return info.param.name; });

// ---- Adam -------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Rng rng(1);
  ad::ParameterStore s;
  auto& w = s.add_matrix("w", 3, 3, rng);
  const auto before = w.value;
  ad::AdamState adam(s);
  ad::adam_step(s, adam, 1e-3);
  EXPECT_EQ(w.value, before);
  EXPECT_EQ(adam.step(), 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  for (double g : {1.0, 10.0, 1e-3}) {
    Rng rng(2);
    ad::ParameterStore s;
    auto& w = s.add_matrix("w", 4, 2, rng);
    const auto before = w.value;
    std::fill(w.grad.begin(), w.grad.end(), g);
    ad::AdamState adam(s);
    ad::adam_step(s, adam, 1e-3);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(before[i] - w.value[i], 1e-3, 1e-6);
    for (double gr : w.grad) EXPECT_EQ(gr, 0.0);
  }
}

TEST(Adam, MatchesHandComputedSecondStep) {
  ad::ParameterStore s;
  auto& p = s.add_vector("p", 1);
  ad::AdamState adam(s);
  p.grad = {2.0};
  ad::adam_step(s, adam, 0.1);
  p.grad = {-1.0};
  ad::adam_step(s, adam, 0.1);
  // m2 = 0.9*0.2 - 0.1 = 0.08, v2 = 0.999*0.004 + 0.001 = 0.004996
  const double m_hat = 0.08 / (1 - 0.81);
  const double v_hat = 0.004996 / (1 - 0.998001);
  const double first = -0.1 * 2.0 / (2.0 + 1e-8);  // m_hat = 2, sqrt(v_hat) = 2
  EXPECT_NEAR(p.value[0], first - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-12);
}

TEST(Adam, ClipNormBoundsTheGradient) {
  ad::ParameterStore s;
  auto& p = s.add_vector("p", 2);
  ad::AdamState adam(s, {.clip_norm = 1.0});
  p.grad = {30.0, 40.0};
  ad::adam_step(s, adam, 0.1);
  // Clipped gradient (0.6, 0.8); Adam's first step is still lr * sign.
  EXPECT_NEAR(p.value[0], -0.1, 1e-6);
  EXPECT_NEAR(p.value[1], -0.1, 1e-6);
}

TEST(Adam, MinimisesAQuadratic) {
  ad::ParameterStore s;
  auto& p = s.add_vector("p", 3);
  p.value = {4.0, -2.0, 7.0};
  ad::AdamState adam(s);
  for (int i = 0; i < 3000; ++i) {
    ad::Tape tape;
    const auto v = tape.param(p);
    const auto diff = ad::sub(v, tape.constant(std::vector<double>{1.0, 2.0, 3.0}));
    tape.backward(ad::dot(diff, diff));
    ad::adam_step(s, adam, 0.05);
  }
  EXPECT_NEAR(p.value[0], 1.0, 1e-3);
  EXPECT_NEAR(p.value[1], 2.0, 1e-3);
  EXPECT_NEAR(p.value[2], 3.0, 1e-3);
}

// ---- parameters and checkpoints ----------------------------------------------

TEST(ParameterStore, InitialisationRanges) {
  Rng rng(3);
  ad::ParameterStore s;
  const auto& w = s.add_matrix("w", 25, 16, rng);
  const auto& b = s.add_bias("b", 25, 16, rng);
  const auto& z = s.add_vector("z", 5);
  for (double v : w.value) EXPECT_LE(std::abs(v), 0.25);
  for (double v : b.value) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_NE(b.value, std::vector<double>(25, 0.0));
  EXPECT_EQ(z.value, std::vector<double>(5, 0.0));
  EXPECT_EQ(s.total_size(), 25u * 16 + 25 + 5);
  EXPECT_THROW(s.at("missing"), std::out_of_range);
  EXPECT_THROW(s.add_vector("w", 3), std::invalid_argument);
}

TEST(Checkpoint, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "evacc_ckpt_roundtrip.bin";
  Rng rng(4);
  ad::ParameterStore a;
  a.add_matrix("layer.w", 5, 3, rng);
  a.add_bias("layer.b", 5, 3, rng);
  ad::save_checkpoint(a, path);

  Rng other(99);
  ad::ParameterStore b;
  b.add_matrix("layer.w", 5, 3, other);
  b.add_bias("layer.b", 5, 3, other);
  ad::load_checkpoint(b, path);
  EXPECT_EQ(a.at("layer.w").value, b.at("layer.w").value);
  EXPECT_EQ(a.at("layer.b").value, b.at("layer.b").value);

  ad::ParameterStore wrong;
  wrong.add_matrix("layer.w", 3, 5, other);
  wrong.add_vector("layer.b", 5);
  EXPECT_THROW(ad::load_checkpoint(wrong, path), std::runtime_error);

  std::ofstream(path, std::ios::binary) << "garbage";
  EXPECT_THROW(ad::load_checkpoint(b, path), std::runtime_error);
  std::filesystem::remove(path);
}
