#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evacc/agents.hpp"
#include "evacc/env.hpp"
#include "evacc/evaluation.hpp"
#include "evacc/mc_oracle.hpp"
#include "evacc/training.hpp"

namespace evacc::harness {

/// Everything that determines a run. Defaults reproduce the reference experiments.
struct ExperimentConfig {
  agents::AgentKind agent = agents::AgentKind::Threshold;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  long episodes = 50'000;
  long eval_interval = 500;
  int eval_episodes = 500;
  bool initial_eval = false;
  agents::ActionSelection eval_selection = agents::ActionSelection::Greedy;
  int final_window = 5;  ///< evaluations averaged into the reported final numbers

  int t_max = 30;
  double r_correct = 30.0;
  double r_incorrect = -30.0;
  double r_timeout = -30.0;

  double gamma = 0.95;
  double eta = 1.0;
  double clip_norm = 0.0;
  double sensitivity = 5.0;  ///< evidence scale, used by the joint agent

  double rnn_lr = 1e-3;
  double rnn_entropy = 5.0;
  double threshold_lr = 1e-4;
  double threshold_entropy = 0.5;
  double joint_evidence_lr = 0.0;   ///< 0 = 5e-4 for epsilon <= 0.2, else 1e-3
  double joint_threshold_lr = 0.0;  ///< same rule
  double joint_evidence_entropy = 1.0;
  double joint_threshold_entropy = 2.0;

  int mc_rollouts = 10'000;

  std::string output_dir = "out";
  bool save_checkpoint = false;

  void validate() const;
  env::EnvConfig env_config() const;
  agents::AgentSettings agent_settings() const;
  agents::TrainConfig train_config() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Flat JSON object; unknown keys are rejected so typos do not go unnoticed.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);
/// Keys absent from `json` keep the values already present in `base`.
ExperimentConfig config_from_json(std::string_view json, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Final metrics of a run, as written to summary.json.
struct Summary {
  ExperimentConfig config;
  EvalRecord final;  ///< mean of the last `final_window` evaluations
  long eval_records = 0;
  std::optional<double> best_tau;  ///< Monte-Carlo runs only
  std::vector<mc::RolloutStats> mc_cells;
};

std::string summary_to_json(const Summary& summary);
Summary summary_from_json(std::string_view json);
Summary load_summary(const std::filesystem::path& path);

/// Columns: agent,epsilon,seed,episodes_trained,accuracy,mean_decision_time,mean_reward.
void write_curve_csv(std::ostream& os, const ExperimentConfig& config,
                     const agents::LearningCurve& curve);

struct RunOptions {
  bool verbose = false;
};

/// Execute one experiment and write its outputs into config.output_dir:
/// curve.csv (learning agents) or sweep.csv (mc_oracle), summary.json and,
/// on request, params.ckpt. Throws on invalid configuration or I/O failure.
Summary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace evacc::harness
