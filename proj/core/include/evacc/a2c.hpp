#pragma once

#include <span>

#include "evacc/autodiff.hpp"

namespace evacc::a2c {

/// One recorded step of an on-policy episode. `logprob`, `value` and
/// `entropy` live on the episode tape; `next_value` is a detached number.
struct Transition {
  ad::Var logprob;
  ad::Var value;
  ad::Var entropy;
  double reward = 0.0;
  double next_value = 0.0;
  bool terminal = false;
};

struct A2CConfig {
  double gamma = 0.95;
  double eta = 1.0;  ///< value-loss weight
  double beta_entropy = 0.0;
  double lr = 1e-3;

  void validate() const;
};

struct UpdateStats {
  double mean_loss = 0.0;
  double mean_advantage = 0.0;
};

/// G = r + gamma * v(s'), with v(s') taken as 0 on terminal steps.
double one_step_return(const Transition& tr, double gamma);

/// -(G - v) * logprob + eta * (G - v)^2 - beta * entropy, where the advantage
/// weighting the log-probability uses the detached value.
ad::Var a2c_loss(const Transition& tr, double ret, const A2CConfig& cfg);

/// Sum per-step losses of one episode, backpropagate once and take one Adam
/// step. Throws std::invalid_argument on an empty episode.
UpdateStats update_episode(std::span<const Transition> transitions, ad::ParameterStore& params,
                           ad::AdamState& adam, const A2CConfig& cfg);

}  // namespace evacc::a2c
