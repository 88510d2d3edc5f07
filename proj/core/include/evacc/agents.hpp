#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "evacc/a2c.hpp"
#include "evacc/accumulator.hpp"
#include "evacc/autodiff.hpp"
#include "evacc/env.hpp"
#include "evacc/rng.hpp"

namespace evacc::agents {

enum class AgentKind { McOracle, A2cRnn, Threshold, Joint };

std::string_view to_string(AgentKind kind);
/// Accepts "mc_oracle", "a2c_rnn", "threshold", "joint".
AgentKind parse_agent_kind(std::string_view name);

/// What happened at one step of an episode.
struct StepTrace {
  int symbol = 0;
  double tau = 0.0;      ///< threshold in force (accumulator agents)
  double max_rho = 0.0;  ///< largest preference after accumulating (accumulator agents)
  std::optional<int> guess;
};

struct EpisodeResult {
  double reward = 0.0;
  int decision_time = 0;  ///< samples seen before the guess; t_max on timeout
  bool correct = false;
  env::OutcomeKind outcome = env::OutcomeKind::NoGuess;
  int hidden_mode = 0;
  std::vector<StepTrace> trace;
};

/// How actions are chosen outside of training. Training always samples.
enum class ActionSelection {
  Sample,  ///< draw from the policy distributions
  Greedy,  ///< most probable action; Beta evidence replaced by its mean
};

std::string_view to_string(ActionSelection selection);
ActionSelection parse_action_selection(std::string_view name);

/// Learner settings for one network.
struct LearnerSettings {
  double lr = 1e-3;
  double beta_entropy = 0.0;
  double gamma = 0.95;
  double eta = 1.0;
  double clip_norm = 0.0;

  a2c::A2CConfig a2c() const { return {gamma, eta, beta_entropy, lr}; }
};

class Agent {
 public:
  Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;

  /// Play one episode. `env_rng` drives the environment, `act_rng` the
  /// agent's sampling. With `learn` set, one A2C update per learner follows
  /// and actions are always sampled.
  virtual EpisodeResult run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                                    bool learn,
                                    ActionSelection selection = ActionSelection::Sample) = 0;

  /// Transitions of the most recent episode, per learner. Valid until the
  /// next run_episode call.
  virtual std::vector<std::span<const a2c::Transition>> last_transitions() const = 0;

  virtual std::vector<ad::ParameterStore*> parameter_stores() = 0;
};

/// Forced-selection recurrent baseline: 4-bit input -> 25 ReLU -> Elman(25)
/// -> 11-way policy (10 modes + No-Op at index 10) and a scalar value.
class RnnAgent final : public Agent {
 public:
  static constexpr std::size_t kEmbed = 25;
  static constexpr std::size_t kHidden = 25;
  static constexpr int kNoOp = 10;
  static constexpr int kActions = 11;

  RnnAgent(const LearnerSettings& settings, Rng& init_rng);

  AgentKind kind() const override { return AgentKind::A2cRnn; }
  EpisodeResult run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                            bool learn,
                            ActionSelection selection = ActionSelection::Sample) override;
  std::vector<std::span<const a2c::Transition>> last_transitions() const override {
    return {transitions_};
  }
  std::vector<ad::ParameterStore*> parameter_stores() override { return {&params_}; }

  ad::ParameterStore& params() { return params_; }
  ad::Tape& tape() { return tape_; }
  const a2c::UpdateStats& last_update() const { return last_update_; }

 private:
  LearnerSettings settings_;
  ad::ParameterStore params_;
  ad::Parameter* w_embed_;
  ad::Parameter* b_embed_;
  ad::Parameter* w_ih_;
  ad::Parameter* b_ih_;
  ad::Parameter* w_hh_;
  ad::Parameter* b_hh_;
  ad::Parameter* w_policy_;
  ad::Parameter* b_policy_;
  ad::Parameter* w_value_;
  ad::Parameter* b_value_;
  ad::AdamState adam_;
  ad::Tape tape_;
  std::vector<a2c::Transition> transitions_;
  a2c::UpdateStats last_update_;
};

/// Hidden layer of 25 ReLU units feeding a softmax over a threshold grid and
/// a scalar value head.
struct ThresholdNet {
  static constexpr std::size_t kHidden = 25;

  ThresholdNet(std::size_t input_size, std::size_t grid_size, const std::string& prefix,
               ad::ParameterStore& store, Rng& init_rng);

  struct Output {
    ad::Var probs;
    ad::Var value;
  };
  Output forward(ad::Tape& tape, ad::Var input) const;

  ad::Parameter* w_hidden;
  ad::Parameter* b_hidden;
  ad::Parameter* w_policy;
  ad::Parameter* b_policy;
  ad::Parameter* w_value;
  ad::Parameter* b_value;
};

/// Accumulator agent whose evidence is the one-hot sample itself; a small
/// network picks tau from a grid at every step.
class ThresholdAgent final : public Agent {
 public:
  ThresholdAgent(const LearnerSettings& settings, Rng& init_rng,
                 ThresholdGrid grid = ThresholdGrid::range(0.1, 0.9));

  AgentKind kind() const override { return AgentKind::Threshold; }
  EpisodeResult run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                            bool learn,
                            ActionSelection selection = ActionSelection::Sample) override;
  std::vector<std::span<const a2c::Transition>> last_transitions() const override {
    return {transitions_};
  }
  std::vector<ad::ParameterStore*> parameter_stores() override { return {&params_}; }

  ad::ParameterStore& params() { return params_; }
  const ThresholdGrid& grid() const { return grid_; }

 private:
  LearnerSettings settings_;
  ThresholdGrid grid_;
  ad::ParameterStore params_;
  ThresholdNet net_;
  ad::AdamState adam_;
  ad::Tape tape_;
  std::vector<a2c::Transition> transitions_;
};

/// 4-bit input -> 20 ReLU -> per-channel (alpha, beta) = softplus(.) + 1,
/// plus a value head that reads the hidden layer without training it.
struct EvidenceNet {
  static constexpr std::size_t kHidden = 20;
  static constexpr std::size_t kChannels = 10;

  EvidenceNet(ad::ParameterStore& store, Rng& init_rng);

  struct Output {
    ad::Var alpha;
    ad::Var beta;
    ad::Var value;
  };
  Output forward(ad::Tape& tape, ad::Var input) const;

  ad::Parameter* w_hidden;
  ad::Parameter* b_hidden;
  ad::Parameter* w_alpha;
  ad::Parameter* b_alpha;
  ad::Parameter* w_beta;
  ad::Parameter* b_beta;
  ad::Parameter* w_value;
  ad::Parameter* b_value;
};

/// Evidence network (Beta-distributed evidence per channel) trained jointly
/// with a threshold network on the same reward.
class JointAgent final : public Agent {
 public:
  JointAgent(const LearnerSettings& evidence_settings, const LearnerSettings& threshold_settings,
             double sensitivity, Rng& init_rng,
             ThresholdGrid grid = ThresholdGrid::range(0.5, 0.9));

  AgentKind kind() const override { return AgentKind::Joint; }
  EpisodeResult run_episode(const env::EnvConfig& env_config, Rng& env_rng, Rng& act_rng,
                            bool learn,
                            ActionSelection selection = ActionSelection::Sample) override;
  /// {evidence learner, threshold learner}.
  std::vector<std::span<const a2c::Transition>> last_transitions() const override {
    return {evidence_transitions_, threshold_transitions_};
  }
  std::vector<ad::ParameterStore*> parameter_stores() override {
    return {&evidence_params_, &threshold_params_};
  }

  ad::ParameterStore& evidence_params() { return evidence_params_; }
  ad::ParameterStore& threshold_params() { return threshold_params_; }
  const ThresholdGrid& grid() const { return grid_; }
  double sensitivity() const { return sensitivity_; }

 private:
  LearnerSettings evidence_settings_;
  LearnerSettings threshold_settings_;
  double sensitivity_;
  ThresholdGrid grid_;
  ad::ParameterStore evidence_params_;
  ad::ParameterStore threshold_params_;
  EvidenceNet evidence_net_;
  ThresholdNet threshold_net_;
  ad::AdamState evidence_adam_;
  ad::AdamState threshold_adam_;
  ad::Tape tape_;
  std::vector<a2c::Transition> evidence_transitions_;
  std::vector<a2c::Transition> threshold_transitions_;
};

/// Draw an index from a probability vector.
int sample_categorical(std::span<const double> probs, Rng& rng);
/// First index of the largest probability.
int argmax(std::span<const double> probs);

/// Per-kind hyperparameters. The defaults reproduce the reference experiments.
struct AgentSettings {
  LearnerSettings rnn{1e-3, 5.0};
  LearnerSettings threshold{1e-4, 0.5};
  LearnerSettings joint_evidence{0.0, 1.0};   ///< lr 0 selects the noise-dependent default
  LearnerSettings joint_threshold{0.0, 2.0};  ///< lr 0 selects the noise-dependent default
  double sensitivity = 5.0;  ///< evidence scale for the joint agent

};

/// 5e-4 for epsilon in {0, 0.2}, 1e-3 above.
double default_joint_lr(double epsilon);

/// Build an agent. Throws std::invalid_argument for McOracle, which has no
/// trainable policy.
std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentSettings& settings, double epsilon,
                                  Rng& init_rng);

}  // namespace evacc::agents
