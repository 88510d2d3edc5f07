#include "evacc/experiment.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace evacc::harness {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  env_config().validate();
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
  if (final_window < 1) throw std::invalid_argument("final_window must be >= 1");
  if (mc_rollouts < 1) throw std::invalid_argument("mc_rollouts must be >= 1");
  if (!(sensitivity > 0.0)) throw std::invalid_argument("sensitivity must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  for (double lr : {rnn_lr, threshold_lr}) {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
  }
  for (double lr : {joint_evidence_lr, joint_threshold_lr}) {
    if (lr < 0.0) throw std::invalid_argument("learning rates must be positive (0 = default)");
  }
  if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
}

env::EnvConfig ExperimentConfig::env_config() const {
  env::EnvConfig c;
  c.epsilon = epsilon;
  c.t_max = t_max;
  c.r_correct = r_correct;
  c.r_incorrect = r_incorrect;
  c.r_timeout = r_timeout;
  return c;
}

agents::AgentSettings ExperimentConfig::agent_settings() const {
  agents::AgentSettings s;
  auto learner = [&](double lr, double entropy) {
    return agents::LearnerSettings{lr, entropy, gamma, eta, clip_norm};
  };
  s.rnn = learner(rnn_lr, rnn_entropy);
  s.threshold = learner(threshold_lr, threshold_entropy);
  s.joint_evidence = learner(joint_evidence_lr, joint_evidence_entropy);
  s.joint_threshold = learner(joint_threshold_lr, joint_threshold_entropy);
  s.sensitivity = sensitivity;
  return s;
}

agents::TrainConfig ExperimentConfig::train_config() const {
  return {episodes, eval_interval, eval_episodes, initial_eval, eval_selection};
}

// ---- JSON -------------------------------------------------------------------

namespace {

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["agent"] = std::string(agents::to_string(c.agent));
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["episodes"] = c.episodes;
  j["eval_interval"] = c.eval_interval;
  j["eval_episodes"] = c.eval_episodes;
  j["initial_eval"] = c.initial_eval;
  j["eval_selection"] = std::string(agents::to_string(c.eval_selection));
  j["final_window"] = c.final_window;
  j["t_max"] = c.t_max;
  j["r_correct"] = c.r_correct;
  j["r_incorrect"] = c.r_incorrect;
  j["r_timeout"] = c.r_timeout;
  j["gamma"] = c.gamma;
  j["eta"] = c.eta;
  j["clip_norm"] = c.clip_norm;
  j["sensitivity"] = c.sensitivity;
  j["rnn_lr"] = c.rnn_lr;
  j["rnn_entropy"] = c.rnn_entropy;
  j["threshold_lr"] = c.threshold_lr;
  j["threshold_entropy"] = c.threshold_entropy;
  j["joint_evidence_lr"] = c.joint_evidence_lr;
  j["joint_threshold_lr"] = c.joint_threshold_lr;
  j["joint_evidence_entropy"] = c.joint_evidence_entropy;
  j["joint_threshold_entropy"] = c.joint_threshold_entropy;
  j["mc_rollouts"] = c.mc_rollouts;
  j["output_dir"] = c.output_dir;
  j["save_checkpoint"] = c.save_checkpoint;
  return j;
}

template <typename T>
void read(const ordered_json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(fmt::format("config key '{}': {}", key, e.what()));
    }
  }
}

ExperimentConfig config_from(const ordered_json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const ordered_json known = config_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (auto it = j.find("agent"); it != j.end()) {
    c.agent = agents::parse_agent_kind(it->get<std::string>());
  }
  if (auto it = j.find("eval_selection"); it != j.end()) {
    c.eval_selection = agents::parse_action_selection(it->get<std::string>());
  }
  read(j, "epsilon", c.epsilon);
  read(j, "seed", c.seed);
  read(j, "episodes", c.episodes);
  read(j, "eval_interval", c.eval_interval);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "initial_eval", c.initial_eval);
  read(j, "final_window", c.final_window);
  read(j, "t_max", c.t_max);
  read(j, "r_correct", c.r_correct);
  read(j, "r_incorrect", c.r_incorrect);
  read(j, "r_timeout", c.r_timeout);
  read(j, "gamma", c.gamma);
  read(j, "eta", c.eta);
  read(j, "clip_norm", c.clip_norm);
  read(j, "sensitivity", c.sensitivity);
  read(j, "rnn_lr", c.rnn_lr);
  read(j, "rnn_entropy", c.rnn_entropy);
  read(j, "threshold_lr", c.threshold_lr);
  read(j, "threshold_entropy", c.threshold_entropy);
  read(j, "joint_evidence_lr", c.joint_evidence_lr);
  read(j, "joint_threshold_lr", c.joint_threshold_lr);
  read(j, "joint_evidence_entropy", c.joint_evidence_entropy);
  read(j, "joint_threshold_entropy", c.joint_threshold_entropy);
  read(j, "mc_rollouts", c.mc_rollouts);
  read(j, "output_dir", c.output_dir);
  read(j, "save_checkpoint", c.save_checkpoint);
  return c;
}

ordered_json parse(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ordered_json record_json(const EvalRecord& r) {
  ordered_json j;
  j["episodes_trained"] = r.episodes_trained;
  j["accuracy"] = r.accuracy;
  j["mean_decision_time"] = r.mean_decision_time;
  j["mean_reward"] = r.mean_reward;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config, int indent) {
  return config_json(config).dump(indent);
}

ExperimentConfig config_from_json(std::string_view json, ExperimentConfig base) {
  return config_from(parse(json), std::move(base));
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  try {
    return config_from_json(slurp(path), std::move(base));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string summary_to_json(const Summary& summary) {
  ordered_json j;
  j["agent"] = std::string(agents::to_string(summary.config.agent));
  j["epsilon"] = summary.config.epsilon;
  j["seed"] = summary.config.seed;
  j["final"] = record_json(summary.final);
  j["eval_records"] = summary.eval_records;
  if (summary.best_tau) {
    j["best_tau"] = *summary.best_tau;
    ordered_json cells = ordered_json::array();
    for (const auto& c : summary.mc_cells) {
      cells.push_back({{"tau", c.tau},
                       {"n", c.n},
                       {"mean_reward", c.mean_reward},
                       {"reward_std", c.reward_std},
                       {"mean_accuracy", c.mean_accuracy},
                       {"mean_decision_time", c.mean_decision_time}});
    }
    j["cells"] = std::move(cells);
  }
  j["config"] = config_json(summary.config);
  return j.dump(2) + "\n";
}

Summary summary_from_json(std::string_view json) {
  const ordered_json j = parse(json);
  Summary s;
  try {
    s.config = config_from(j.at("config"), {});
    const auto& f = j.at("final");
    s.final.episodes_trained = f.at("episodes_trained").get<long>();
    s.final.accuracy = f.at("accuracy").get<double>();
    s.final.mean_decision_time = f.at("mean_decision_time").get<double>();
    s.final.mean_reward = f.at("mean_reward").get<double>();
    s.eval_records = j.at("eval_records").get<long>();
    if (j.contains("best_tau")) {
      s.best_tau = j.at("best_tau").get<double>();
      for (const auto& c : j.at("cells")) {
        mc::RolloutStats cell;
        cell.tau = c.at("tau").get<double>();
        cell.n = c.at("n").get<int>();
        cell.mean_reward = c.at("mean_reward").get<double>();
        cell.reward_std = c.at("reward_std").get<double>();
        cell.mean_accuracy = c.at("mean_accuracy").get<double>();
        cell.mean_decision_time = c.at("mean_decision_time").get<double>();
        s.mc_cells.push_back(cell);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed summary: ") + e.what());
  }
  return s;
}

Summary load_summary(const std::filesystem::path& path) {
  try {
    return summary_from_json(slurp(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_curve_csv(std::ostream& os, const ExperimentConfig& config,
                     const agents::LearningCurve& curve) {
  os << "agent,epsilon,seed,episodes_trained,accuracy,mean_decision_time,mean_reward\n";
  for (const auto& r : curve) {
    fmt::print(os, "{},{:.4f},{},{},{:.6f},{:.6f},{:.6f}\n", agents::to_string(config.agent),
               config.epsilon, config.seed, r.episodes_trained, r.accuracy, r.mean_decision_time,
               r.mean_reward);
  }
}

// ---- running ----------------------------------------------------------------

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << contents;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

Summary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::filesystem::path out = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) {
    throw std::runtime_error("cannot create output directory " + out.string());
  }

  const Rng root(config.seed);
  const auto started = std::chrono::steady_clock::now();
  Summary summary;
  summary.config = config;

  if (config.agent == agents::AgentKind::McOracle) {
    const auto result = mc::sweep(config.env_config(), mc::baseline_grid(), config.mc_rollouts,
                                  root.substream("mc"));
    summary.best_tau = result.best_tau;
    summary.mc_cells = result.cells;
    for (const auto& c : result.cells) {
      if (c.tau == result.best_tau) {
        summary.final = {0, c.mean_accuracy, c.mean_decision_time, c.mean_reward};
      }
    }
    std::ostringstream csv;
    mc::write_sweep_csv(csv, {result});
    write_file(out / "sweep.csv", csv.str());
  } else {
    Rng init = root.substream("init");
    auto agent = agents::make_agent(config.agent, config.agent_settings(), config.epsilon, init);
    agents::EvalCallback progress;
    if (options.verbose) {
      progress = [&](const EvalRecord& r) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        fmt::print(std::cerr, "[{} eps={}] {:>6} episodes  acc={:.3f}  time={:.2f}  reward={:7.2f}  ({:.1f}s)\n",
                   agents::to_string(config.agent), config.epsilon, r.episodes_trained, r.accuracy,
                   r.mean_decision_time, r.mean_reward, secs);
      };
    }
    const auto curve =
        agents::train(*agent, config.env_config(), config.train_config(), root, progress);
    summary.final = agents::final_performance(curve, static_cast<std::size_t>(config.final_window));
    summary.eval_records = static_cast<long>(curve.size());
    std::ostringstream csv;
    write_curve_csv(csv, config, curve);
    write_file(out / "curve.csv", csv.str());
    if (config.save_checkpoint) {
      std::vector<const ad::ParameterStore*> stores;
      for (auto* s : agent->parameter_stores()) stores.push_back(s);
      ad::save_checkpoint(stores, out / "params.ckpt");
    }
  }
  write_file(out / "summary.json", summary_to_json(summary));
  return summary;
}

}  // namespace evacc::harness
