#include "evacc/mc_oracle.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace evacc::mc {

RolloutStats rollout_fixed_threshold(const env::EnvConfig& config, double tau, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("rollout needs at least one episode");
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in [0, 1)");
  config.validate();

  RolloutStats stats;
  stats.tau = tau;
  stats.n = n;
  double sum = 0.0, sum_sq = 0.0, correct = 0.0, time = 0.0;
  std::vector<double> kappa(static_cast<std::size_t>(config.n_symbols), 0.0);
  for (int episode = 0; episode < n; ++episode) {
    env::EpisodeState state = env::reset(config, rng);
    AccumulatorState acc = reset_accumulator(kappa.size(), 1.0);
    int symbol = env::draw_sample(state, config, rng);
    while (true) {
      std::fill(kappa.begin(), kappa.end(), 0.0);
      kappa[static_cast<std::size_t>(symbol)] = 1.0;
      accumulate(acc, kappa);
      const auto guess = decide(preference(acc), tau);
      const auto out = env::step(state, config, guess, rng);
      if (out.terminated) {
        sum += out.reward;
        sum_sq += out.reward * out.reward;
        if (out.kind == env::OutcomeKind::CorrectGuess) correct += 1.0;
        time += out.kind == env::OutcomeKind::Timeout ? config.t_max : state.t;
        break;
      }
      symbol = out.next_symbol;
    }
  }
  const double dn = n;
  stats.mean_reward = sum / dn;
  stats.reward_std = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / dn) / (dn - 1))) : 0.0;
  stats.mean_accuracy = correct / dn;
  stats.mean_decision_time = time / dn;
  return stats;
}

SweepResult sweep(const env::EnvConfig& config, const ThresholdGrid& grid, int n, const Rng& rng) {
  SweepResult result;
  result.epsilon = config.epsilon;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Rng cell = rng.substream("mc-cell", i);
    result.cells.push_back(rollout_fixed_threshold(config, grid[i], n, cell));
    if (i == 0 || result.cells.back().mean_reward > result.best_mean_reward) {
      result.best_mean_reward = result.cells.back().mean_reward;
      result.best_tau = grid[i];
    }
  }
  return result;
}

ThresholdGrid baseline_grid() { return ThresholdGrid::range(0.0, 0.9); }

void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "epsilon,tau,n,mean_reward,mean_accuracy,mean_decision_time\n";
  for (const auto& r : results) {
    for (const auto& c : r.cells) {
      fmt::print(os, "{:.4f},{:.4f},{},{:.6f},{:.6f},{:.6f}\n", r.epsilon, c.tau, c.n, c.mean_reward,
                 c.mean_accuracy, c.mean_decision_time);
    }
  }
}

}  // namespace evacc::mc
