#pragma once

#include <iosfwd>
#include <vector>

#include "evacc/accumulator.hpp"
#include "evacc/env.hpp"
#include "evacc/rng.hpp"

namespace evacc::mc {

struct RolloutStats {
  double tau = 0.0;
  int n = 0;
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double mean_accuracy = 0.0;
  double mean_decision_time = 0.0;  ///< timeouts count as t_max
};

struct SweepResult {
  double epsilon = 0.0;
  std::vector<RolloutStats> cells;
  double best_tau = 0.0;
  double best_mean_reward = 0.0;
};

/// Play `n` episodes with one-hot observations as evidence (S = 1) and a
/// fixed threshold.
RolloutStats rollout_fixed_threshold(const env::EnvConfig& config, double tau, int n, Rng& rng);

/// rollout_fixed_threshold for every grid value, each on its own substream
/// of `rng`; the best mean reward wins, ties going to the lower tau.
SweepResult sweep(const env::EnvConfig& config, const ThresholdGrid& grid, int n, const Rng& rng);

/// The {0, 0.1, ..., 0.9} grid of the baseline.
ThresholdGrid baseline_grid();

/// Columns: epsilon,tau,n,mean_reward,mean_accuracy,mean_decision_time.
void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results);

}  // namespace evacc::mc
