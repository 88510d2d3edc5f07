#include "evacc/training.hpp"

#include <algorithm>
#include <stdexcept>

namespace evacc::agents {

LearningCurve train(Agent& agent, const env::EnvConfig& env_config, const TrainConfig& config,
                    const Rng& root, const EvalCallback& on_eval) {
  if (config.episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (config.eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
  env_config.validate();

  Rng env_rng = root.substream("env");
  Rng act_rng = root.substream("act");
  LearningCurve curve;
  std::uint64_t eval_index = 0;
  auto snapshot = [&](long trained) {
    auto rec = harness::evaluate(agent, env_config, config.eval_episodes,
                                 root.substream("eval", eval_index++), config.eval_selection);
    rec.episodes_trained = trained;
    curve.push_back(rec);
    if (on_eval) on_eval(rec);
  };

  if (config.initial_eval || config.episodes == 0) snapshot(0);
  for (long episode = 1; episode <= config.episodes; ++episode) {
    agent.run_episode(env_config, env_rng, act_rng, true);
    if (episode % config.eval_interval == 0) snapshot(episode);
  }
  return curve;
}

harness::EvalRecord final_performance(const LearningCurve& curve, std::size_t window) {
  if (curve.empty()) throw std::invalid_argument("empty learning curve");
  const std::size_t n = std::min(window, curve.size());
  harness::EvalRecord out;
  out.episodes_trained = curve.back().episodes_trained;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) {
    out.accuracy += curve[i].accuracy;
    out.mean_decision_time += curve[i].mean_decision_time;
    out.mean_reward += curve[i].mean_reward;
  }
  out.accuracy /= static_cast<double>(n);
  out.mean_decision_time /= static_cast<double>(n);
  out.mean_reward /= static_cast<double>(n);
  return out;
}

}  // namespace evacc::agents
