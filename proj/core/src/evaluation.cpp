#include "evacc/evaluation.hpp"

#include <stdexcept>

namespace evacc::harness {

EvalRecord evaluate(agents::Agent& agent, const env::EnvConfig& env_config, int n_eval,
                    const Rng& rng, agents::ActionSelection selection) {
  if (n_eval < 1) throw std::invalid_argument("evaluation needs at least one episode");
  Rng env_rng = rng.substream("eval-env");
  Rng act_rng = rng.substream("eval-act");
  EvalRecord rec;
  for (int i = 0; i < n_eval; ++i) {
    const auto result = agent.run_episode(env_config, env_rng, act_rng, false, selection);
    rec.accuracy += result.correct ? 1.0 : 0.0;
    rec.mean_decision_time += result.decision_time;
    rec.mean_reward += result.reward;
  }
  rec.accuracy /= n_eval;
  rec.mean_decision_time /= n_eval;
  rec.mean_reward /= n_eval;
  return rec;
}

}  // namespace evacc::harness
