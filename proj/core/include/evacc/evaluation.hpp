#pragma once

#include "evacc/agents.hpp"
#include "evacc/env.hpp"
#include "evacc/rng.hpp"

namespace evacc::harness {

/// Performance snapshot taken with learning switched off.
struct EvalRecord {
  long episodes_trained = 0;
  double accuracy = 0.0;            ///< correct guesses / episodes; timeouts count as wrong
  double mean_decision_time = 0.0;  ///< timeouts count as t_max
  double mean_reward = 0.0;

  bool operator==(const EvalRecord&) const = default;
};

/// Run `n_eval` episodes without updates. Throws std::invalid_argument when
/// n_eval < 1.
EvalRecord evaluate(agents::Agent& agent, const env::EnvConfig& env_config, int n_eval,
                    const Rng& rng,
                    agents::ActionSelection selection = agents::ActionSelection::Sample);

}  // namespace evacc::harness
