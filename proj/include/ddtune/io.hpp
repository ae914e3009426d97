#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddtune/errors.hpp"
#include "ddtune/noise_model.hpp"
#include "ddtune/nsd_fitting.hpp"
#include "ddtune/rl_agent.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

using json = nlohmann::json;

/// 17 significant digits so text round-trips are lossless.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ParseError("failed writing " + path.string());
}

inline json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace detail {

template <typename T>
T field(const json& j, const char* name, const std::string& context) {
  if (!j.is_object() || !j.contains(name)) throw ConfigError(context + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(context + ": field '" + std::string(name) + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* name, T fallback, const std::string& context) {
  if (!j.contains(name) || j.at(name).is_null()) return fallback;
  return field<T>(j, name, context);
}

inline Interval interval(const json& j, const char* name, const std::string& context) {
  if (!j.contains(name)) throw ConfigError(context + ": missing range '" + name + "'");
  const auto& r = j.at(name);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
    throw ConfigError(context + ": range '" + std::string(name) + "' must be [lo, hi]");
  return {r[0].get<double>(), r[1].get<double>()};
}

}  // namespace detail

// --- noise environments -----------------------------------------------------

inline json to_json(const GaussianNsd& n) {
  json j = {{"y0", n.y0}, {"a", n.a}, {"v_L", n.v_L}, {"w1", n.w1}};
  j["source_B"] = n.source_b ? json(*n.source_b) : json(nullptr);
  return j;
}

inline GaussianNsd gaussian_from_json(const json& j) {
  const std::string ctx = "environment";
  GaussianNsd n;
  n.y0 = detail::field<double>(j, "y0", ctx);
  n.a = detail::field<double>(j, "a", ctx);
  n.v_L = detail::field<double>(j, "v_L", ctx);
  n.w1 = detail::field<double>(j, "w1", ctx);
  if (j.contains("source_B") && !j.at("source_B").is_null()) n.source_b = j.at("source_B").get<double>();
  n.validate();
  return n;
}

inline json environments_to_json(const std::vector<GaussianNsd>& envs) {
  json arr = json::array();
  for (const auto& e : envs) arr.push_back(to_json(e));
  return arr;
}

inline std::vector<GaussianNsd> environments_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("environments: expected a JSON array");
  std::vector<GaussianNsd> out;
  for (const auto& e : j) out.push_back(gaussian_from_json(e));
  return out;
}

inline json to_json(const ThreeComponentNsd& n) {
  return {{"y0", n.y0}, {"a_g", n.a_g}, {"v_g", n.v_g}, {"w_g", n.w_g}, {"a_1f", n.a_1f}};
}

inline ThreeComponentNsd three_component_from_json(const json& j) {
  const std::string ctx = "three-component NSD";
  ThreeComponentNsd n{detail::field<double>(j, "y0", ctx), detail::field<double>(j, "a_g", ctx),
                      detail::field<double>(j, "v_g", ctx), detail::field<double>(j, "w_g", ctx),
                      detail::field<double>(j, "a_1f", ctx)};
  n.validate();
  return n;
}

inline json to_json(const EnvironmentSampler& s) {
  const auto& r = s.ranges;
  return {{"count", s.count},
          {"seed", s.seed},
          {"gamma", s.gamma},
          {"include_two_pi", s.include_two_pi},
          {"ranges",
           {{"y0", {r.y0.lo, r.y0.hi}},
            {"a", {r.a.lo, r.a.hi}},
            {"B", {r.field_gauss.lo, r.field_gauss.hi}},
            {"w1", {r.w1.lo, r.w1.hi}}}}};
}

/// Parses a sampler config; `ranges` is required, other fields default.
inline EnvironmentSampler sampler_from_json(const json& j) {
  const std::string ctx = "sampler config";
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  if (!j.contains("ranges") || !j.at("ranges").is_object())
    throw ConfigError(ctx + ": missing field 'ranges'");
  EnvironmentSampler s;
  const auto& r = j.at("ranges");
  s.ranges.y0 = detail::interval(r, "y0", ctx);
  s.ranges.a = detail::interval(r, "a", ctx);
  s.ranges.field_gauss = detail::interval(r, "B", ctx);
  s.ranges.w1 = detail::interval(r, "w1", ctx);
  s.count = detail::field_or<std::size_t>(j, "count", s.count, ctx);
  s.seed = detail::field_or<std::uint64_t>(j, "seed", s.seed, ctx);
  s.gamma = detail::field_or<double>(j, "gamma", s.gamma, ctx);
  s.include_two_pi = detail::field_or<bool>(j, "include_two_pi", s.include_two_pi, ctx);
  s.validate();
  return s;
}

// --- sequences ----------------------------------------------------------------

inline json actions_to_json(const std::vector<SegmentKind>& actions) {
  json arr = json::array();
  for (auto a : actions) arr.push_back(to_code(a));
  return arr;
}

inline std::vector<SegmentKind> actions_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("actions: expected an array of codes 0-3");
  std::vector<SegmentKind> out;
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw ConfigError("actions: codes must be integers 0-3");
    out.push_back(kind_from_code(c.get<int>()));
  }
  return out;
}

inline json to_json(const DdSequence& s) {
  return {{"delta_t", s.delta_t()}, {"pulses_per_segment", s.pulses_per_segment()}, {"actions", actions_to_json(s.actions())}};
}

inline DdSequence sequence_from_json(const json& j, int default_pulses = kDefaultPulsesPerSegment) {
  const std::string ctx = "sequence";
  return DdSequence(actions_from_json(detail::field<json>(j, "actions", ctx)),
                    detail::field_or<double>(j, "delta_t", kDefaultSegmentDuration, ctx),
                    detail::field_or<int>(j, "pulses_per_segment", default_pulses, ctx));
}

// --- grids and training config ---------------------------------------------------

inline json to_json(const FrequencyGrid& g) {
  return {{"omega_min", g.omega_min}, {"omega_max", g.omega_max}, {"n_points", g.n_points}};
}

inline FrequencyGrid grid_from_json(const json& j) {
  const std::string ctx = "grid";
  FrequencyGrid g;
  g.omega_min = detail::field_or<double>(j, "omega_min", g.omega_min, ctx);
  g.omega_max = detail::field_or<double>(j, "omega_max", g.omega_max, ctx);
  g.n_points = detail::field_or<std::size_t>(j, "n_points", g.n_points, ctx);
  g.validate();
  return g;
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
  const std::string ctx = "train config";
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  c.delta_t = detail::field_or<double>(j, "delta_t", c.delta_t, ctx);
  c.pulses_per_segment = detail::field_or<int>(j, "pulses_per_segment", c.pulses_per_segment, ctx);
  c.m = detail::field_or<std::size_t>(j, "m", c.m, ctx);
  c.alpha = detail::field_or<double>(j, "alpha", c.alpha, ctx);
  c.eps_start = detail::field_or<double>(j, "eps_start", c.eps_start, ctx);
  c.eps_decay = detail::field_or<double>(j, "eps_decay", c.eps_decay, ctx);
  c.eps_end = detail::field_or<double>(j, "eps_end", c.eps_end, ctx);
  c.n_episodes = detail::field_or<std::size_t>(j, "n_episodes", c.n_episodes, ctx);
  c.seed = detail::field_or<std::uint64_t>(j, "seed", c.seed, ctx);
  c.greedy_only = detail::field_or<bool>(j, "greedy_only", c.greedy_only, ctx);
  if (j.contains("base_sequence")) c.base_sequence = actions_from_json(j.at("base_sequence"));
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  c.validate();
  return c;
}

inline json to_json(const TrainConfig& c) {
  return {{"delta_t", c.delta_t},     {"pulses_per_segment", c.pulses_per_segment},
          {"m", c.m},                 {"alpha", c.alpha},
          {"eps_start", c.eps_start}, {"eps_decay", c.eps_decay},
          {"eps_end", c.eps_end},     {"n_episodes", c.n_episodes},
          {"seed", c.seed},           {"greedy_only", c.greedy_only},
          {"base_sequence", actions_to_json(c.base_sequence)},
          {"grid", to_json(c.grid)}};
}

/// One (environment, T) training outcome as written by `train`.
inline json train_record(std::size_t env_id, const TrainResult& r) {
  return {{"env_id", env_id},
          {"T", r.target_time},
          {"actions", actions_to_json(r.best_sequence.actions())},
          {"delta_t", r.best_sequence.delta_t()},
          {"pulses_per_segment", r.best_sequence.pulses_per_segment()},
          {"coherence", r.best_reward},
          {"episodes", r.episodes.size()},
          {"final_epsilon", r.final_epsilon},
          {"source", r.source}};
}

inline json q_table_to_json(const QTable& q, std::size_t m) {
  json arr = json::array();
  for (const auto& [key, row] : q.snapshot()) {
    arr.push_back({{"state", AggregatedState::decode(key, m).history}, {"q", row}});
  }
  return arr;
}

// --- fitting -----------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + s + "' is not a number");
  }
}

/// CSV with header `label,time_us,coherence[,weight]`; rows grouped by label in
/// first-seen order.
inline std::vector<DecayDataset> datasets_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("decay CSV: empty input");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "label" || header[1] != "time_us" || header[2] != "coherence")
    throw ParseError("decay CSV: header must be label,time_us,coherence[,weight]");
  const bool weighted = header.size() >= 4 && header[3] == "weight";
  std::vector<DecayDataset> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "decay CSV line " + std::to_string(row);
    if (cells.size() < 3) throw ParseError(where + ": expected at least 3 columns");
    const auto label = DecayLabel::parse(cells[0]);
    DecayPoint p{parse_number(cells[1], where), parse_number(cells[2], where), 1.0};
    if (weighted && cells.size() >= 4 && !cells[3].empty()) p.weight = parse_number(cells[3], where);
    auto it = std::find_if(out.begin(), out.end(), [&](const DecayDataset& d) { return d.label == label; });
    if (it == out.end()) {
      out.push_back({label, {}});
      it = out.end() - 1;
    }
    it->points.push_back(p);
  }
  return out;
}

inline json to_json(const FitResult& r, const std::vector<DecayDataset>& datasets) {
  json res = json::array();
  for (std::size_t i = 0; i < r.residuals.size(); ++i) {
    res.push_back({{"label", datasets[i].label.name()}, {"times", datasets[i].times()}, {"residuals", r.residuals[i]}});
  }
  return {{"params", to_json(r.params)}, {"sse", r.sse},
          {"initial_sse", r.initial_sse}, {"converged", r.converged},
          {"iterations", r.iterations},   {"evaluations", r.evaluations},
          {"residuals", res}};
}

inline json cache_stats_json(const TransformCache::Stats& s) {
  return {{"hits", s.hits}, {"misses", s.misses}, {"entries", s.entries}};
}

}  // namespace ddtune
