// Command-line front end: run experiments, Monte-Carlo sweeps, and turn their
// outputs into the reward table and learning-curve charts.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "evacc/experiment.hpp"
#include "evacc/mc_oracle.hpp"
#include "evacc/report.hpp"

namespace fs = std::filesystem;
using evacc::harness::ExperimentConfig;

namespace {

/// Flags shared by `run` and `sweep`. Unset flags leave the config file (or
/// the built-in defaults) untouched.
struct CommonFlags {
  std::string config_file;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

struct RunFlags {
  CommonFlags common;
  std::optional<std::string> agent;
  std::optional<long> episodes;
  std::optional<long> eval_interval;
  std::optional<int> eval_episodes;
  bool save_checkpoint = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--epsilon", f.epsilon, "environment noise level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", f.seed, "root random seed");
  cmd->add_option("--out", f.out, "output directory");
}

ExperimentConfig base_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_file.empty()) c = evacc::harness::load_config(f.config_file, c);
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  return c;
}

void print_final(const evacc::harness::Summary& s) {
  fmt::print("{} eps={:g} seed={}: accuracy {:.3f}, decision time {:.2f}, reward {:.2f}",
             evacc::agents::to_string(s.config.agent), s.config.epsilon, s.config.seed,
             s.final.accuracy, s.final.mean_decision_time, s.final.mean_reward);
  if (s.best_tau) fmt::print(" (best tau {:.1f})", *s.best_tau);
  fmt::print("\n");
}

int cmd_run(const RunFlags& f) {
  ExperimentConfig c = base_config(f.common);
  if (f.agent) c.agent = evacc::agents::parse_agent_kind(*f.agent);
  if (f.episodes) c.episodes = *f.episodes;
  if (f.eval_interval) c.eval_interval = *f.eval_interval;
  if (f.eval_episodes) c.eval_episodes = *f.eval_episodes;
  if (f.save_checkpoint) c.save_checkpoint = true;
  print_final(evacc::harness::run_experiment(c, {.verbose = f.verbose}));
  return 0;
}

int cmd_sweep(const CommonFlags& f, std::vector<double> epsilons, std::optional<int> rollouts) {
  ExperimentConfig c = base_config(f);
  c.agent = evacc::agents::AgentKind::McOracle;
  if (rollouts) c.mc_rollouts = *rollouts;
  if (epsilons.empty()) epsilons.push_back(c.epsilon);
  const fs::path root = c.output_dir;
  std::vector<evacc::harness::Summary> summaries;
  for (double eps : epsilons) {
    ExperimentConfig cell = c;
    cell.epsilon = eps;
    cell.output_dir = (root / fmt::format("mc_eps{:.1f}", eps)).string();
    summaries.push_back(evacc::harness::run_experiment(cell));
    print_final(summaries.back());
  }
  fmt::print("\n{}", evacc::harness::format_table(evacc::harness::build_table(summaries)));
  return 0;
}

int cmd_table(const std::vector<std::string>& files) {
  std::vector<evacc::harness::Summary> summaries;
  for (const auto& f : files) summaries.push_back(evacc::harness::load_summary(f));
  fmt::print("{}", evacc::harness::format_table(evacc::harness::build_table(summaries)));
  return 0;
}

int cmd_plot(const std::vector<std::string>& curves, const std::vector<std::string>& sweeps,
             const std::string& out) {
  const std::vector<fs::path> curve_paths(curves.begin(), curves.end());
  const std::vector<fs::path> sweep_paths(sweeps.begin(), sweeps.end());
  for (const auto& p : evacc::harness::emit_curves(curve_paths, sweep_paths, out)) {
    fmt::print("{}\n", p.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence-accumulator reinforcement-learning experiments"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "train and evaluate one agent");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--agent", run.agent, "mc_oracle, a2c_rnn, threshold or joint");
  run_cmd->add_option("--episodes", run.episodes, "training episodes")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--eval-interval", run.eval_interval, "episodes between evaluations")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--eval-episodes", run.eval_episodes, "episodes per evaluation")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--save-checkpoint", run.save_checkpoint, "write params.ckpt");
  run_cmd->add_flag("-v,--verbose", run.verbose, "print every evaluation");

  CommonFlags sweep;
  std::vector<double> sweep_eps;
  std::optional<int> rollouts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo fixed-threshold baseline");
  add_common(sweep_cmd, sweep);
  sweep_cmd->remove_option(sweep_cmd->get_option("--epsilon"));
  sweep_cmd->add_option("--epsilon", sweep_eps, "noise levels (repeatable)")
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--rollouts", rollouts, "episodes per threshold")->check(CLI::PositiveNumber);

  std::vector<std::string> summaries;
  auto* table_cmd = app.add_subcommand("table", "aggregate summary.json files into a reward table");
  table_cmd->add_option("summaries", summaries, "summary.json files")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> curves;
  std::vector<std::string> sweeps;
  std::string plot_out = "plots";
  auto* plot_cmd = app.add_subcommand("plot", "render learning curves as SVG");
  plot_cmd->add_option("curves", curves, "curve.csv files")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--sweep", sweeps, "sweep.csv files for the Monte-Carlo reference")
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep, sweep_eps, rollouts);
    if (*table_cmd) return cmd_table(summaries);
    if (*plot_cmd) return cmd_plot(curves, sweeps, plot_out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "evacc: {}\n", e.what());
    return 1;
  }
  return 0;
}
