#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evacc/agents.hpp"
#include "evacc/evaluation.hpp"
#include "evacc/experiment.hpp"

namespace evacc::harness {

/// Final expected reward per (agent, epsilon), averaged over the seeds that
/// were supplied. Only agents and noise levels that occur in the input get a
/// row or column; absent combinations stay empty.
struct RewardTable {
  std::vector<agents::AgentKind> agents;  ///< in AgentKind order
  std::vector<double> epsilons;           ///< ascending
  std::vector<std::vector<std::optional<double>>> reward;  ///< [agent][epsilon]
  std::vector<std::vector<int>> runs;                       ///< seeds per cell

  std::optional<double> at(agents::AgentKind agent, double epsilon) const;
  /// Cell minus the Monte-Carlo cell at the same epsilon; empty when either
  /// is missing.
  std::optional<double> delta(agents::AgentKind agent, double epsilon) const;
};

RewardTable build_table(const std::vector<Summary>& summaries);

/// Plain-text grid of rewards, followed by a grid of differences to the
/// Monte-Carlo row when that row is present. Missing cells are blank.
std::string format_table(const RewardTable& table);

/// One row of curve.csv.
struct CurveRow {
  agents::AgentKind agent = agents::AgentKind::Threshold;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  EvalRecord record;
};

/// Parse a curve.csv stream. `source` names the input in error messages.
/// Throws std::runtime_error naming the offending line for malformed rows,
/// and for input without data rows.
std::vector<CurveRow> read_curve_csv(std::istream& is, const std::string& source);

/// Metrics of the best threshold at one noise level, read from sweep.csv.
struct McReference {
  double accuracy = 0.0;
  double mean_decision_time = 0.0;
  double mean_reward = 0.0;
};

/// Best-reward row per epsilon of a sweep.csv stream (ties to the lower tau).
std::map<double, McReference> read_sweep_csv(std::istream& is, const std::string& source);

/// Render accuracy, decision-time and reward charts (SVG) per epsilon found
/// in `curve_csvs`, overlaying agents (seeds of one agent are averaged) and
/// drawing the Monte-Carlo reference from `sweep_csvs` as a horizontal line.
/// Every input is parsed before anything is written, so a bad file leaves
/// `out_dir` untouched. Returns the written paths.
std::vector<std::filesystem::path> emit_curves(const std::vector<std::filesystem::path>& curve_csvs,
                                               const std::vector<std::filesystem::path>& sweep_csvs,
                                               const std::filesystem::path& out_dir);

}  // namespace evacc::harness
