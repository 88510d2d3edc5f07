#pragma once

#include <functional>
#include <vector>

#include "evacc/agents.hpp"
#include "evacc/evaluation.hpp"

namespace evacc::agents {

struct TrainConfig {
  long episodes = 50'000;
  long eval_interval = 500;
  int eval_episodes = 500;
  /// Also evaluate the untrained agent. Always done when `episodes` is 0.
  bool initial_eval = false;
  ActionSelection eval_selection = ActionSelection::Sample;
};

using LearningCurve = std::vector<harness::EvalRecord>;

/// Called after every evaluation; useful for progress output.
using EvalCallback = std::function<void(const harness::EvalRecord&)>;

/// Train `agent` on-policy and evaluate it every `eval_interval` episodes.
/// Training uses the "env" and "act" substreams of `root`; evaluation k uses
/// ("eval", k), so evaluation never perturbs the training trajectory.
LearningCurve train(Agent& agent, const env::EnvConfig& env_config, const TrainConfig& config,
                    const Rng& root, const EvalCallback& on_eval = {});

/// Mean of the last `window` records (fewer if the curve is shorter).
harness::EvalRecord final_performance(const LearningCurve& curve, std::size_t window = 5);

}  // namespace evacc::agents
