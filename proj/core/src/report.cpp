#include "evacc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace evacc::harness {

namespace {

// Noise levels are written with four decimals; compare them on that grid.
double eps_key(double epsilon) { return std::round(epsilon * 1e4) / 1e4; }

std::size_t index_of(const std::vector<double>& v, double x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

std::string fmt_cell(const std::optional<double>& v, bool signed_value = false) {
  if (!v) return "";
  return signed_value ? fmt::format("{:+.2f}", *v) : fmt::format("{:.2f}", *v);
}

}  // namespace

// ---- table ------------------------------------------------------------------

std::optional<double> RewardTable::at(agents::AgentKind agent, double epsilon) const {
  const auto a = std::find(agents.begin(), agents.end(), agent);
  const std::size_t e = index_of(epsilons, eps_key(epsilon));
  if (a == agents.end() || e == epsilons.size()) return std::nullopt;
  return reward[static_cast<std::size_t>(a - agents.begin())][e];
}

std::optional<double> RewardTable::delta(agents::AgentKind agent, double epsilon) const {
  const auto cell = at(agent, epsilon);
  const auto mc = at(agents::AgentKind::McOracle, epsilon);
  if (!cell || !mc) return std::nullopt;
  return *cell - *mc;
}

RewardTable build_table(const std::vector<Summary>& summaries) {
  std::set<agents::AgentKind> kinds;
  std::set<double> eps;
  for (const auto& s : summaries) {
    kinds.insert(s.config.agent);
    eps.insert(eps_key(s.config.epsilon));
  }
  RewardTable t;
  t.agents.assign(kinds.begin(), kinds.end());
  t.epsilons.assign(eps.begin(), eps.end());
  std::vector<std::vector<double>> sums(t.agents.size(), std::vector<double>(t.epsilons.size()));
  t.runs.assign(t.agents.size(), std::vector<int>(t.epsilons.size(), 0));
  for (const auto& s : summaries) {
    const auto a = static_cast<std::size_t>(
        std::find(t.agents.begin(), t.agents.end(), s.config.agent) - t.agents.begin());
    const std::size_t e = index_of(t.epsilons, eps_key(s.config.epsilon));
    sums[a][e] += s.final.mean_reward;
    ++t.runs[a][e];
  }
  t.reward.assign(t.agents.size(), std::vector<std::optional<double>>(t.epsilons.size()));
  for (std::size_t a = 0; a < t.agents.size(); ++a) {
    for (std::size_t e = 0; e < t.epsilons.size(); ++e) {
      if (t.runs[a][e] > 0) t.reward[a][e] = sums[a][e] / t.runs[a][e];
    }
  }
  return t;
}

std::string format_table(const RewardTable& table) {
  const auto grid = [&](bool deltas) {
    std::string out = fmt::format("{:<12}", deltas ? "delta vs MC" : "agent");
    for (double e : table.epsilons) out += fmt::format(" | {:>8}", fmt::format("eps={:g}", e));
    out += "\n";
    for (std::size_t a = 0; a < table.agents.size(); ++a) {
      out += fmt::format("{:<12}", agents::to_string(table.agents[a]));
      for (std::size_t e = 0; e < table.epsilons.size(); ++e) {
        const auto v = deltas ? table.delta(table.agents[a], table.epsilons[e]) : table.reward[a][e];
        out += fmt::format(" | {:>8}", fmt_cell(v, deltas));
      }
      out += "\n";
    }
    return out;
  };
  std::string out = grid(false);
  if (std::find(table.agents.begin(), table.agents.end(), agents::AgentKind::McOracle) !=
      table.agents.end()) {
    out += "\n" + grid(true);
  }
  return out;
}

// ---- CSV input --------------------------------------------------------------

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void bad_row(const std::string& source, long line, const std::string& why) {
  throw std::runtime_error(fmt::format("{}:{}: {}", source, line, why));
}

/// Reads a header-plus-rows CSV, invoking `row` with the split fields and
/// the 1-based line number of every non-empty data line.
template <typename RowFn>
long read_csv(std::istream& is, const std::string& source, std::string_view header,
              std::size_t columns, RowFn&& row) {
  std::string line;
  long line_no = 0;
  bool have_header = false;
  long rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line != header) bad_row(source, line_no, fmt::format("expected header '{}'", header));
      have_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != columns) {
      bad_row(source, line_no,
              fmt::format("expected {} fields, found {}", columns, fields.size()));
    }
    row(fields, line_no);
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(fmt::format("{}: no data rows", source));
  return rows;
}

}  // namespace

std::vector<CurveRow> read_curve_csv(std::istream& is, const std::string& source) {
  std::vector<CurveRow> rows;
  read_csv(is, source, "agent,epsilon,seed,episodes_trained,accuracy,mean_decision_time,mean_reward",
           7, [&](const std::vector<std::string_view>& f, long line) {
             CurveRow r;
             try {
               r.agent = agents::parse_agent_kind(f[0]);
             } catch (const std::invalid_argument&) {
               bad_row(source, line, fmt::format("unknown agent '{}'", f[0]));
             }
             if (!parse_number(f[1], r.epsilon) || !parse_number(f[2], r.seed) ||
                 !parse_number(f[3], r.record.episodes_trained) ||
                 !parse_number(f[4], r.record.accuracy) ||
                 !parse_number(f[5], r.record.mean_decision_time) ||
                 !parse_number(f[6], r.record.mean_reward)) {
               bad_row(source, line, "malformed number");
             }
             rows.push_back(r);
           });
  return rows;
}

std::map<double, McReference> read_sweep_csv(std::istream& is, const std::string& source) {
  std::map<double, std::pair<double, McReference>> best;  // epsilon -> (tau, metrics)
  read_csv(is, source, "epsilon,tau,n,mean_reward,mean_accuracy,mean_decision_time", 6,
           [&](const std::vector<std::string_view>& f, long line) {
             double eps = 0.0;
             double tau = 0.0;
             long n = 0;
             McReference m;
             if (!parse_number(f[0], eps) || !parse_number(f[1], tau) || !parse_number(f[2], n) ||
                 !parse_number(f[3], m.mean_reward) || !parse_number(f[4], m.accuracy) ||
                 !parse_number(f[5], m.mean_decision_time)) {
               bad_row(source, line, "malformed number");
             }
             const auto it = best.find(eps_key(eps));
             const bool better = it == best.end() || m.mean_reward > it->second.second.mean_reward ||
                                 (m.mean_reward == it->second.second.mean_reward &&
                                  tau < it->second.first);
             if (better) best[eps_key(eps)] = {tau, m};
           });
  std::map<double, McReference> out;
  for (const auto& [eps, entry] : best) out.emplace(eps, entry.second);
  return out;
}

// ---- SVG charts -------------------------------------------------------------

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (episodes, value)
};

struct Metric {
  const char* file_tag;
  const char* title;
  double (*pick)(const EvalRecord&);
  double (*pick_mc)(const McReference&);
};

constexpr Metric kMetrics[] = {
    {"accuracy", "Accuracy", [](const EvalRecord& r) { return r.accuracy; },
     [](const McReference& m) { return m.accuracy; }},
    {"decision_time", "Decision time", [](const EvalRecord& r) { return r.mean_decision_time; },
     [](const McReference& m) { return m.mean_decision_time; }},
    {"reward", "Reward", [](const EvalRecord& r) { return r.mean_reward; },
     [](const McReference& m) { return m.mean_reward; }},
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};

std::string render_chart(const std::string& title, const std::vector<Series>& series,
                         const std::optional<double>& reference) {
  constexpr double W = 640, H = 400, L = 70, R = 160, T = 40, B = 50;
  double x_max = 1.0;
  double y_min = reference.value_or(0.0);
  double y_max = reference.value_or(1.0);
  bool first = !reference;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_max = std::max(x_max, x);
      if (first) {
        y_min = y_max = y;
        first = false;
      }
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (y_max - y_min < 1e-9) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  const auto px = [&](double x) { return L + (W - L - R) * x / x_max; };
  const auto py = [&](double y) { return H - B - (H - T - B) * (y - y_min) / (y_max - y_min); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      W, H, (L + W - R) / 2, title);
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", L, T,
      W - L - R, H - T - B);
  for (int i = 0; i <= 4; ++i) {
    const double y = y_min + (y_max - y_min) * i / 4.0;
    const double x = x_max * i / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 6,
                       py(y) + 4, y);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.0f}</text>\n", px(x),
                       H - B + 18, x);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">training episodes</text>\n",
                     (L + W - R) / 2, H - 10);

  double legend_y = T + 10;
  const auto legend = [&](const std::string& label, const std::string& colour, bool dashed) {
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n"
        "<text x=\"{5}\" y=\"{6}\">{7}</text>\n",
        W - R + 10, legend_y, W - R + 34, colour, dashed ? " stroke-dasharray=\"6,4\"" : "",
        W - R + 40, legend_y + 4, label);
    legend_y += 18;
  };

  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string colour = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : series[i].points) pts += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
    legend(series[i].label, colour, false);
  }
  if (reference) {
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"black\" "
        "stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
        L, py(*reference), W - R);
    legend("mc_oracle", "black", true);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::vector<std::filesystem::path> emit_curves(const std::vector<std::filesystem::path>& curve_csvs,
                                               const std::vector<std::filesystem::path>& sweep_csvs,
                                               const std::filesystem::path& out_dir) {
  const auto open = [](const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error(fmt::format("cannot open {}", p.string()));
    return is;
  };

  // epsilon -> agent -> episodes -> (sum of records, count)
  std::map<double, std::map<agents::AgentKind, std::map<long, std::pair<EvalRecord, int>>>> data;
  for (const auto& path : curve_csvs) {
    auto is = open(path);
    for (const auto& row : read_curve_csv(is, path.string())) {
      auto& [sum, count] = data[eps_key(row.epsilon)][row.agent][row.record.episodes_trained];
      sum.accuracy += row.record.accuracy;
      sum.mean_decision_time += row.record.mean_decision_time;
      sum.mean_reward += row.record.mean_reward;
      ++count;
    }
  }
  if (data.empty()) throw std::runtime_error("no curve files given");
  std::map<double, McReference> mc;
  for (const auto& path : sweep_csvs) {
    auto is = open(path);
    for (const auto& [eps, ref] : read_sweep_csv(is, path.string())) mc[eps] = ref;
  }

  std::vector<std::pair<std::filesystem::path, std::string>> charts;
  for (const auto& [eps, by_agent] : data) {
    const auto ref = mc.find(eps);
    for (const Metric& metric : kMetrics) {
      std::vector<Series> series;
      for (const auto& [agent, points] : by_agent) {
        Series s{std::string(agents::to_string(agent)), {}};
        for (const auto& [episodes, entry] : points) {
          s.points.emplace_back(static_cast<double>(episodes),
                                metric.pick(entry.first) / entry.second);
        }
        series.push_back(std::move(s));
      }
      std::optional<double> reference;
      if (ref != mc.end()) reference = metric.pick_mc(ref->second);
      charts.emplace_back(out_dir / fmt::format("eps{:.1f}_{}.svg", eps, metric.file_tag),
                          render_chart(fmt::format("{} (eps = {:g})", metric.title, eps), series,
                                       reference));
    }
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [path, svg] : charts) {
    std::ofstream os(path, std::ios::binary);
    if (!(os << svg)) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    written.push_back(path);
  }
  return written;
}

}  // namespace evacc::harness
