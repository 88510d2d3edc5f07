#include "evacc/mc_oracle.hpp"

#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

using namespace evacc;

namespace {

env::EnvConfig noisy(double epsilon) {
  env::EnvConfig c;
  c.epsilon = epsilon;
  return c;
}

}  // namespace

TEST(Rollout, LowThresholdNoiseless) {
  Rng rng(1);
  const auto s = mc::rollout_fixed_threshold(noisy(0.0), 0.1, 10'000, rng);
  EXPECT_EQ(s.mean_reward, 30.0);
  EXPECT_EQ(s.mean_accuracy, 1.0);
  EXPECT_EQ(s.mean_decision_time, 1.0);
  EXPECT_EQ(s.reward_std, 0.0);
  EXPECT_EQ(s.n, 10'000);
}

TEST(Rollout, HighThresholdNoiseless) {
  Rng rng(2);
  const auto s = mc::rollout_fixed_threshold(noisy(0.0), 0.9, 10'000, rng);
  EXPECT_EQ(s.mean_reward, 26.0);
  EXPECT_EQ(s.mean_decision_time, 5.0);
  EXPECT_EQ(s.mean_accuracy, 1.0);
}

TEST(Rollout, CrossingTimesForEveryThreshold) {
  // First t with e^t / (e^t + 9) > tau, i.e. t > ln(9 tau / (1 - tau)).
  const std::vector<std::pair<double, int>> expected{{0.0, 1}, {0.2, 1}, {0.3, 2}, {0.4, 2},
                                                     {0.5, 3}, {0.6, 3}, {0.7, 4}, {0.8, 4},
                                                     {0.9, 5}};
  for (auto [tau, t] : expected) {
    Rng rng(3);
    const auto s = mc::rollout_fixed_threshold(noisy(0.0), tau, 100, rng);
    EXPECT_EQ(s.mean_decision_time, t) << "tau=" << tau;
    EXPECT_EQ(s.mean_reward, 31.0 - t) << "tau=" << tau;
  }
}

TEST(Rollout, FirstSampleGuessingUnderHeavyNoise) {
  Rng rng(4);
  const auto s = mc::rollout_fixed_threshold(noisy(0.8), 0.1, 10'000, rng);
  // The first sample is the mode with probability 0.2: 0.2 * 30 + 0.8 * (-30).
  EXPECT_NEAR(s.mean_reward, -18.0, 1.0);
  EXPECT_NEAR(s.mean_accuracy, 0.2, 0.015);
  EXPECT_EQ(s.mean_decision_time, 1.0);
}

TEST(Rollout, Errors) {
  Rng rng(5);
  EXPECT_THROW(mc::rollout_fixed_threshold(noisy(0.0), 0.5, 0, rng), std::invalid_argument);
  EXPECT_THROW(mc::rollout_fixed_threshold(noisy(0.0), 1.0, 10, rng), std::invalid_argument);
  EXPECT_THROW(mc::rollout_fixed_threshold(noisy(2.0), 0.5, 10, rng), std::invalid_argument);
}

TEST(Rollout, TimeoutsCountAsFullHorizon) {
  Rng rng(6);
  env::EnvConfig c = noisy(1.0);  // the mode never shows up
  c.t_max = 3;
  const auto s = mc::rollout_fixed_threshold(c, 0.99, 500, rng);
  EXPECT_EQ(s.mean_decision_time, 3.0);
  EXPECT_EQ(s.mean_accuracy, 0.0);
  EXPECT_EQ(s.mean_reward, -30.0);
}

TEST(Sweep, NoiselessPrefersLowestThreshold) {
  const auto r = mc::sweep(noisy(0.0), mc::baseline_grid(), 1000, Rng(7));
  EXPECT_EQ(r.best_mean_reward, 30.0);
  EXPECT_EQ(r.best_tau, 0.0);  // tau 0, 0.1 and 0.2 tie; the lowest wins
  EXPECT_EQ(r.cells.size(), 10u);
}

TEST(Sweep, ReproducesReferenceBaselines) {
  for (auto [eps, reward] : {std::pair{0.4, 25.0}, {0.8, -8.2}}) {
    const auto r = mc::sweep(noisy(eps), mc::baseline_grid(), 10'000, Rng(8));
    EXPECT_NEAR(r.best_mean_reward, reward, 1.0) << "eps=" << eps;
  }
}

TEST(Sweep, CellsUseIndependentStreams) {
  const auto full = mc::sweep(noisy(0.4), mc::baseline_grid(), 200, Rng(9));
  const auto tail = mc::sweep(noisy(0.4), ThresholdGrid({0.0, 0.5}), 200, Rng(9));
  EXPECT_EQ(full.cells[0].mean_reward, tail.cells[0].mean_reward);
  const auto again = mc::sweep(noisy(0.4), mc::baseline_grid(), 200, Rng(9));
  for (std::size_t i = 0; i < full.cells.size(); ++i) {
    EXPECT_EQ(full.cells[i].mean_reward, again.cells[i].mean_reward);
  }
}

TEST(Sweep, Csv) {
  const auto r = mc::sweep(noisy(0.0), ThresholdGrid({0.1, 0.9}), 10, Rng(10));
  std::ostringstream os;
  mc::write_sweep_csv(os, {r});
  EXPECT_EQ(os.str(),
            "epsilon,tau,n,mean_reward,mean_accuracy,mean_decision_time\n"
            "0.0000,0.1000,10,30.000000,1.000000,1.000000\n"
            "0.0000,0.9000,10,26.000000,1.000000,5.000000\n");
}
