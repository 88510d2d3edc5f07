#include "evacc/agents.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evacc::agents {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::McOracle:
      return "mc_oracle";
    case AgentKind::A2cRnn:
      return "a2c_rnn";
    case AgentKind::Threshold:
      return "threshold";
    case AgentKind::Joint:
      return "joint";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view name) {
  for (auto kind : {AgentKind::McOracle, AgentKind::A2cRnn, AgentKind::Threshold, AgentKind::Joint}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown agent kind '" + std::string(name) +
                              "' (expected mc_oracle, a2c_rnn, threshold or joint)");
}

std::string_view to_string(ActionSelection selection) {
  return selection == ActionSelection::Greedy ? "greedy" : "sample";
}

ActionSelection parse_action_selection(std::string_view name) {
  if (name == "sample") return ActionSelection::Sample;
  if (name == "greedy") return ActionSelection::Greedy;
  throw std::invalid_argument("unknown action selection '" + std::string(name) +
                              "' (expected sample or greedy)");
}

int argmax(std::span<const double> probs) {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  // Rounding left u above the total mass; fall back to the last nonzero entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

namespace {

void finish(EpisodeResult& result, const env::StepOutcome& out, const env::EpisodeState& state,
            const env::EnvConfig& config) {
  result.reward = out.reward;
  result.outcome = out.kind;
  result.correct = out.kind == env::OutcomeKind::CorrectGuess;
  result.decision_time = out.kind == env::OutcomeKind::Timeout ? config.t_max : state.t;
}

// Bootstrap targets: each transition's next_value is the value estimate of
// the following step, detached.
void link_values(std::vector<a2c::Transition>& transitions) {
  for (std::size_t i = 0; i + 1 < transitions.size(); ++i) {
    transitions[i].next_value = transitions[i].terminal ? 0.0 : transitions[i + 1].value.scalar();
  }
  if (!transitions.empty()) transitions.back().next_value = 0.0;
}

}  // namespace

// ---- A2C-RNN ----------------------------------------------------------------

RnnAgent::RnnAgent(const LearnerSettings& settings, Rng& init_rng) : settings_(settings) {
  settings_.a2c().validate();
  w_embed_ = &params_.add_matrix("rnn.embed.w", kEmbed, 4, init_rng);
  b_embed_ = &params_.add_bias("rnn.embed.b", kEmbed, 4, init_rng);
  w_ih_ = &params_.add_matrix("rnn.cell.w_ih", kHidden, kEmbed, init_rng);
  b_ih_ = &params_.add_bias("rnn.cell.b_ih", kHidden, kEmbed, init_rng);
  w_hh_ = &params_.add_matrix("rnn.cell.w_hh", kHidden, kHidden, init_rng);
  b_hh_ = &params_.add_bias("rnn.cell.b_hh", kHidden, kHidden, init_rng);
  w_policy_ = &params_.add_matrix("rnn.policy.w", kActions, kHidden, init_rng);
  b_policy_ = &params_.add_bias("rnn.policy.b", kActions, kHidden, init_rng);
  w_value_ = &params_.add_matrix("rnn.value.w", 1, kHidden, init_rng);
  b_value_ = &params_.add_bias("rnn.value.b", 1, kHidden, init_rng);
  adam_ = ad::AdamState(params_, {.clip_norm = settings_.clip_norm});
}

EpisodeResult RnnAgent::run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                                    bool learn, ActionSelection selection) {
  const bool greedy = !learn && selection == ActionSelection::Greedy;
  tape_.clear();
  transitions_.clear();
  EpisodeResult result;

  const ad::Var w_embed = tape_.param(*w_embed_);
  const ad::Var b_embed = tape_.param(*b_embed_);
  const ad::Var w_ih = tape_.param(*w_ih_);
  const ad::Var b_ih = tape_.param(*b_ih_);
  const ad::Var w_hh = tape_.param(*w_hh_);
  const ad::Var b_hh = tape_.param(*b_hh_);
  const ad::Var w_policy = tape_.param(*w_policy_);
  const ad::Var b_policy = tape_.param(*b_policy_);
  const ad::Var w_value = tape_.param(*w_value_);
  const ad::Var b_value = tape_.param(*b_value_);

  env::EpisodeState state = env::reset(env_config, env_rng);
  result.hidden_mode = state.hidden_mode;
  int symbol = env::draw_sample(state, env_config, env_rng);
  const std::vector<double> zeros(kHidden, 0.0);
  ad::Var hidden = tape_.constant(zeros);

  while (true) {
    const auto obs = env::encode_observation(symbol, env::Encoding::Binary4);
    const ad::Var x = tape_.constant(obs.payload);
    const ad::Var embed = ad::relu(ad::linear(x, w_embed, b_embed));
    hidden = ad::elman_cell(embed, hidden, w_ih, b_ih, w_hh, b_hh);
    const ad::Var probs = ad::softmax(ad::linear(hidden, w_policy, b_policy));
    const ad::Var value = ad::linear(hidden, w_value, b_value);

    const int action = greedy ? argmax(probs.value()) : sample_categorical(probs.value(), act_rng);
    const auto terms = ad::categorical_logprob_entropy(probs, action);
    std::optional<int> guess;
    if (action != kNoOp) guess = action;
    result.trace.push_back({symbol, 0.0, 0.0, guess});

    const auto out = env::step(state, env_config, guess, env_rng, env::Encoding::Binary4);
    transitions_.push_back({terms.logprob, value, terms.entropy, out.reward, 0.0, out.terminated});
    if (out.terminated) {
      finish(result, out, state, env_config);
      break;
    }
    symbol = out.next_symbol;
  }
  link_values(transitions_);
  if (learn) last_update_ = a2c::update_episode(transitions_, params_, adam_, settings_.a2c());
  return result;
}

// ---- threshold network ------------------------------------------------------

ThresholdNet::ThresholdNet(std::size_t input_size, std::size_t grid_size, const std::string& prefix,
                           ad::ParameterStore& store, Rng& init_rng) {
  w_hidden = &store.add_matrix(prefix + ".hidden.w", kHidden, input_size, init_rng);
  b_hidden = &store.add_bias(prefix + ".hidden.b", kHidden, input_size, init_rng);
  w_policy = &store.add_matrix(prefix + ".policy.w", grid_size, kHidden, init_rng);
  b_policy = &store.add_bias(prefix + ".policy.b", grid_size, kHidden, init_rng);
  w_value = &store.add_matrix(prefix + ".value.w", 1, kHidden, init_rng);
  b_value = &store.add_bias(prefix + ".value.b", 1, kHidden, init_rng);
}

ThresholdNet::Output ThresholdNet::forward(ad::Tape& tape, ad::Var input) const {
  const ad::Var h = ad::relu(ad::linear(input, tape.param(*w_hidden), tape.param(*b_hidden)));
  return {ad::softmax(ad::linear(h, tape.param(*w_policy), tape.param(*b_policy))),
          ad::linear(h, tape.param(*w_value), tape.param(*b_value))};
}

// ---- threshold agent --------------------------------------------------------

ThresholdAgent::ThresholdAgent(const LearnerSettings& settings, Rng& init_rng, ThresholdGrid grid)
    : settings_(settings),
      grid_(std::move(grid)),
      net_(10, grid_.size(), "threshold", params_, init_rng),
      adam_(params_, {.clip_norm = settings.clip_norm}) {
  settings_.a2c().validate();
}

EpisodeResult ThresholdAgent::run_episode(const env::EnvConfig& env_config, Rng& env_rng,
                                          Rng& act_rng, bool learn,
                                          ActionSelection selection) {
  const bool greedy = !learn && selection == ActionSelection::Greedy;
  tape_.clear();
  transitions_.clear();
  EpisodeResult result;

  env::EpisodeState state = env::reset(env_config, env_rng);
  result.hidden_mode = state.hidden_mode;
  int symbol = env::draw_sample(state, env_config, env_rng);
  AccumulatorState acc = reset_accumulator(10, 1.0);

  while (true) {
    const auto obs = env::encode_observation(symbol, env::Encoding::OneHot10);
    const auto head = net_.forward(tape_, tape_.constant(obs.payload));
    const int bin =
        greedy ? argmax(head.probs.value()) : sample_categorical(head.probs.value(), act_rng);
    const auto terms = ad::categorical_logprob_entropy(head.probs, bin);
    const double tau = grid_[static_cast<std::size_t>(bin)];

    accumulate(acc, obs.payload);
    const Preference pref = preference(acc);
    const auto guess = decide(pref, tau);
    result.trace.push_back({symbol, tau, *std::max_element(pref.rho.begin(), pref.rho.end()), guess});

    const auto out = env::step(state, env_config, guess, env_rng, env::Encoding::OneHot10);
    transitions_.push_back({terms.logprob, head.value, terms.entropy, out.reward, 0.0, out.terminated});
    if (out.terminated) {
      finish(result, out, state, env_config);
      break;
    }
    symbol = out.next_symbol;
  }
  link_values(transitions_);
  if (learn) a2c::update_episode(transitions_, params_, adam_, settings_.a2c());
  return result;
}

// ---- evidence network -------------------------------------------------------

EvidenceNet::EvidenceNet(ad::ParameterStore& store, Rng& init_rng) {
  w_hidden = &store.add_matrix("evidence.hidden.w", kHidden, 4, init_rng);
  b_hidden = &store.add_bias("evidence.hidden.b", kHidden, 4, init_rng);
  w_alpha = &store.add_matrix("evidence.alpha.w", kChannels, kHidden, init_rng);
  b_alpha = &store.add_bias("evidence.alpha.b", kChannels, kHidden, init_rng);
  w_beta = &store.add_matrix("evidence.beta.w", kChannels, kHidden, init_rng);
  b_beta = &store.add_bias("evidence.beta.b", kChannels, kHidden, init_rng);
  w_value = &store.add_matrix("evidence.value.w", 1, kHidden, init_rng);
  b_value = &store.add_bias("evidence.value.b", 1, kHidden, init_rng);
}

EvidenceNet::Output EvidenceNet::forward(ad::Tape& tape, ad::Var input) const {
  const ad::Var h = ad::relu(ad::linear(input, tape.param(*w_hidden), tape.param(*b_hidden)));
  const ad::Var alpha =
      ad::add_scalar(ad::softplus(ad::linear(h, tape.param(*w_alpha), tape.param(*b_alpha))), 1.0);
  const ad::Var beta =
      ad::add_scalar(ad::softplus(ad::linear(h, tape.param(*w_beta), tape.param(*b_beta))), 1.0);
  // The critic reads a detached copy of the hidden layer so its regression
  // error does not reshape the features the evidence heads depend on.
  const ad::Var h_critic = tape.constant(h.value());
  return {alpha, beta, ad::linear(h_critic, tape.param(*w_value), tape.param(*b_value))};
}

// ---- joint agent ------------------------------------------------------------

JointAgent::JointAgent(const LearnerSettings& evidence_settings,
                       const LearnerSettings& threshold_settings, double sensitivity,
                       Rng& init_rng, ThresholdGrid grid)
    : evidence_settings_(evidence_settings),
      threshold_settings_(threshold_settings),
      sensitivity_(sensitivity),
      grid_(std::move(grid)),
      evidence_net_(evidence_params_, init_rng),
      threshold_net_(4, grid_.size(), "threshold", threshold_params_, init_rng),
      evidence_adam_(evidence_params_, {.clip_norm = evidence_settings.clip_norm}),
      threshold_adam_(threshold_params_, {.clip_norm = threshold_settings.clip_norm}) {
  evidence_settings_.a2c().validate();
  threshold_settings_.a2c().validate();
  if (!(sensitivity_ > 0.0)) throw std::invalid_argument("sensitivity must be positive");
}

EpisodeResult JointAgent::run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                                      bool learn, ActionSelection selection) {
  const bool greedy = !learn && selection == ActionSelection::Greedy;
  tape_.clear();
  evidence_transitions_.clear();
  threshold_transitions_.clear();
  EpisodeResult result;

  env::EpisodeState state = env::reset(env_config, env_rng);
  result.hidden_mode = state.hidden_mode;
  int symbol = env::draw_sample(state, env_config, env_rng);
  AccumulatorState acc = reset_accumulator(EvidenceNet::kChannels, sensitivity_);
  std::vector<double> kappa(EvidenceNet::kChannels);

  while (true) {
    const auto obs = env::encode_observation(symbol, env::Encoding::Binary4);
    const ad::Var x = tape_.constant(obs.payload);

    const auto ev = evidence_net_.forward(tape_, x);
    const auto alpha = ev.alpha.value();
    const auto beta = ev.beta.value();
    for (std::size_t i = 0; i < kappa.size(); ++i) {
      kappa[i] = greedy ? alpha[i] / (alpha[i] + beta[i]) : ad::beta_sample(alpha[i], beta[i], act_rng);
    }
    const ad::Var ev_logprob = ad::sum(ad::beta_logprob(ev.alpha, ev.beta, kappa));
    // Mean over channels, so the coefficient does not scale with channel count.
    const ad::Var ev_entropy =
        ad::scale(ad::sum(ad::beta_entropy(ev.alpha, ev.beta)), 1.0 / EvidenceNet::kChannels);

    const auto th = threshold_net_.forward(tape_, x);
    const int bin =
        greedy ? argmax(th.probs.value()) : sample_categorical(th.probs.value(), act_rng);
    const auto terms = ad::categorical_logprob_entropy(th.probs, bin);
    const double tau = grid_[static_cast<std::size_t>(bin)];

    accumulate(acc, kappa);
    const Preference pref = preference(acc);
    const auto guess = decide(pref, tau);
    result.trace.push_back({symbol, tau, *std::max_element(pref.rho.begin(), pref.rho.end()), guess});

    const auto out = env::step(state, env_config, guess, env_rng, env::Encoding::Binary4);
    evidence_transitions_.push_back({ev_logprob, ev.value, ev_entropy, out.reward, 0.0, out.terminated});
    threshold_transitions_.push_back(
        {terms.logprob, th.value, terms.entropy, out.reward, 0.0, out.terminated});
    if (out.terminated) {
      finish(result, out, state, env_config);
      break;
    }
    symbol = out.next_symbol;
  }
  link_values(evidence_transitions_);
  link_values(threshold_transitions_);
  if (learn) {
    a2c::update_episode(evidence_transitions_, evidence_params_, evidence_adam_,
                        evidence_settings_.a2c());
    a2c::update_episode(threshold_transitions_, threshold_params_, threshold_adam_,
                        threshold_settings_.a2c());
  }
  return result;
}

// ---- factory ----------------------------------------------------------------

double default_joint_lr(double epsilon) { return epsilon < 0.3 ? 5e-4 : 1e-3; }

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentSettings& settings, double epsilon,
                                  Rng& init_rng) {
  switch (kind) {
    case AgentKind::A2cRnn:
      return std::make_unique<RnnAgent>(settings.rnn, init_rng);
    case AgentKind::Threshold:
      return std::make_unique<ThresholdAgent>(settings.threshold, init_rng);
    case AgentKind::Joint: {
      LearnerSettings evidence = settings.joint_evidence;
      LearnerSettings threshold = settings.joint_threshold;
      if (evidence.lr <= 0.0) evidence.lr = default_joint_lr(epsilon);
      if (threshold.lr <= 0.0) threshold.lr = default_joint_lr(epsilon);
      return std::make_unique<JointAgent>(evidence, threshold, settings.sensitivity, init_rng);
    }
    case AgentKind::McOracle:
      break;
  }
  throw std::invalid_argument("mc_oracle has no trainable agent");
}

}  // namespace evacc::agents
