// Command-line driver: environment sampling, evaluation, training, oracle
// search, sensitivity comparison, NSD fitting, analysis and cache inspection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddtune/ddtune.hpp"

namespace fs = std::filesystem;
using namespace ddtune;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::vector<double> grid;
  std::optional<double> delta_t;
  std::optional<int> pulses_per_segment;
  std::string quadrature = "filon";
  std::size_t points_per_segment = 2000;
  std::string cache_path;
  std::size_t parallel = 1;
};

FrequencyGrid resolve_grid(const GlobalOptions& g, FrequencyGrid base = {}) {
  if (!g.grid.empty()) {
    if (g.grid.size() != 3) throw ConfigError("--grid expects omega_min omega_max n_points");
    base.omega_min = g.grid[0];
    base.omega_max = g.grid[1];
    if (g.grid[2] < 2 || g.grid[2] != std::floor(g.grid[2])) throw ConfigError("--grid n_points must be an integer >= 2");
    base.n_points = static_cast<std::size_t>(g.grid[2]);
  }
  base.validate();
  return base;
}

QuadratureConfig resolve_quadrature(const GlobalOptions& g) {
  QuadratureConfig q;
  if (g.quadrature == "filon") {
    q.rule = QuadratureRule::filon_trapezoid;
  } else if (g.quadrature == "trapezoid") {
    q.rule = QuadratureRule::trapezoid;
  } else {
    throw ConfigError("--quadrature must be 'filon' or 'trapezoid'");
  }
  if (g.points_per_segment < 2) throw ConfigError("--points-per-segment must be >= 2");
  q.points_per_reference = g.points_per_segment;
  q.reference_duration = g.delta_t.value_or(kDefaultSegmentDuration);
  return q;
}

/// Opens (or creates) the persistent cache named by --cache, else an in-memory one.
class CacheSession {
 public:
  explicit CacheSession(const GlobalOptions& g) : path_(g.cache_path), cache_(open(g)) {}

  TransformCache& get() { return cache_; }

  void finish() {
    if (!path_.empty()) save_cache(cache_, path_);
  }

  json stats() const { return cache_stats_json(cache_.stats()); }

 private:
  static TransformCache open(const GlobalOptions& g) {
    const auto wanted = resolve_quadrature(g);
    if (g.cache_path.empty()) return TransformCache(wanted);
    auto cache = load_cache(g.cache_path, true, wanted);
    if (!(cache.quadrature() == wanted))
      throw ConfigError("cache " + g.cache_path + " was built with different quadrature settings");
    return cache;
  }

  std::string path_;
  TransformCache cache_;
};

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Timestamps live only in the sidecar so primary outputs stay byte-identical.
void write_sidecar(const std::string& out, const std::string& command, const json& extra) {
  if (out.empty()) return;
  json meta = {{"command", command}, {"created_utc", timestamp_utc()}};
  meta.update(extra);
  write_json_file(out + ".meta.json", meta);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::vector<GaussianNsd> load_environments(const std::string& path, std::size_t limit) {
  auto envs = environments_from_json(read_json_file(path));
  if (limit > 0 && envs.size() > limit) envs.resize(limit);
  if (envs.empty()) throw ConfigError(path + ": no environments");
  return envs;
}

std::vector<json> load_records(const std::string& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path))
      if (e.path().extension() == ".json" && e.path().string().find(".meta.") == std::string::npos)
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(path);
  }
  std::vector<json> records;
  for (const auto& f : files) {
    const auto j = read_json_file(f);
    if (!j.is_array()) throw ParseError(f.string() + ": expected a JSON array of result records");
    for (const auto& r : j) records.push_back(r);
  }
  return records;
}

DdSequence record_sequence(const json& r, const GlobalOptions& g) {
  return DdSequence(actions_from_json(r.at("actions")), r.value("delta_t", g.delta_t.value_or(kDefaultSegmentDuration)),
                    r.value("pulses_per_segment", g.pulses_per_segment.value_or(kDefaultPulsesPerSegment)));
}

/// env_id -> sequence for records at time T.
std::map<std::size_t, DdSequence> sequences_at(const std::vector<json>& records, double total_time,
                                               const GlobalOptions& g) {
  std::map<std::size_t, DdSequence> out;
  for (const auto& r : records) {
    if (std::abs(r.at("T").get<double>() - total_time) < 1e-9) out[r.at("env_id").get<std::size_t>()] = record_sequence(r, g);
  }
  return out;
}

std::vector<CoherenceRecord> coherence_records(const std::vector<json>& records) {
  std::vector<CoherenceRecord> out;
  for (const auto& r : records)
    out.push_back({r.at("env_id").get<std::size_t>(), r.at("T").get<double>(), r.at("coherence").get<double>()});
  return out;
}

int pulses_or_default(const GlobalOptions& g) { return g.pulses_per_segment.value_or(kDefaultPulsesPerSegment); }
double delta_t_or_default(const GlobalOptions& g) { return g.delta_t.value_or(kDefaultSegmentDuration); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical-decoupling sequence search and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed (overrides config files)");
  app.add_option("--grid", g.grid, "Frequency grid: omega_min omega_max n_points (rad/us)")->expected(3);
  app.add_option("--delta-t", g.delta_t, "Segment duration in us");
  app.add_option("--pulses-per-segment", g.pulses_per_segment, "Pi pulses in CPMG/UDD segments");
  app.add_option("--quadrature", g.quadrature, "Time-domain rule: filon | trapezoid");
  app.add_option("--points-per-segment", g.points_per_segment, "Quadrature nodes per segment");
  app.add_option("--cache", g.cache_path, "Persistent transform cache file (created if absent)");
  app.add_option("--parallel", g.parallel, "Worker threads across environments")->check(CLI::PositiveNumber);

  // sample-envs
  auto* sample = app.add_subcommand("sample-envs", "Sample Gaussian noise environments");
  std::string sample_config, sample_out;
  std::optional<std::size_t> sample_count;
  sample->add_option("--config", sample_config, "Sampler JSON config");
  sample->add_option("--count", sample_count, "Override environment count");
  sample->add_option("--out", sample_out, "Output environments JSON")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate coherence of a strategy per environment");
  std::string eval_envs, eval_strategy, eval_sequence, eval_out;
  double eval_time = 0.0;
  std::size_t eval_limit = 0;
  eval->add_option("--envs", eval_envs, "Environments JSON")->required();
  eval->add_option("--T", eval_time, "Total time in us")->required();
  auto* strat_opt = eval->add_option("--strategy", eval_strategy, "FID | Hahn | CPMG | UDD");
  auto* seq_opt = eval->add_option("--sequence", eval_sequence, "Sequence JSON or train results JSON");
  strat_opt->excludes(seq_opt);
  eval->add_option("--out", eval_out, "Results CSV (stdout if omitted)");
  eval->add_option("--limit", eval_limit, "Use only the first N environments");

  // train
  auto* train_cmd = app.add_subcommand("train", "Q-learning ladder per environment");
  std::string train_envs, train_config_path, train_out, train_log;
  double train_tmax = 0.0;
  std::size_t train_limit = 0;
  bool train_greedy_only = false;
  train_cmd->add_option("--envs", train_envs, "Environments JSON")->required();
  train_cmd->add_option("--T-max", train_tmax, "Longest target time in us")->required();
  train_cmd->add_option("--train-config", train_config_path, "Training config JSON");
  train_cmd->add_option("--out", train_out, "Results JSON")->required();
  train_cmd->add_option("--episode-log", train_log, "Optional per-episode CSV");
  train_cmd->add_option("--limit", train_limit, "Use only the first N environments");
  train_cmd->add_flag("--greedy-only", train_greedy_only, "Return the greedy rollout only");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force reference search");
  std::string oracle_envs, oracle_mode = "auto", oracle_out;
  std::optional<std::size_t> oracle_n;
  std::optional<double> oracle_time;
  std::size_t oracle_depth = 2, oracle_limit = 0, oracle_exhaustive_limit = 8;
  bool oracle_ladder = false;
  oracle_cmd->add_option("--envs", oracle_envs, "Environments JSON")->required();
  oracle_cmd->add_option("--N", oracle_n, "Number of segments");
  oracle_cmd->add_option("--T", oracle_time, "Total time in us (alternative to --N)");
  oracle_cmd->add_option("--mode", oracle_mode, "exhaustive | incremental | auto");
  oracle_cmd->add_option("--depth", oracle_depth, "Incremental look-ahead depth");
  oracle_cmd->add_option("--exhaustive-limit", oracle_exhaustive_limit, "Largest N for exhaustive mode");
  oracle_cmd->add_flag("--ladder", oracle_ladder, "Emit results for every N up to the target");
  oracle_cmd->add_option("--out", oracle_out, "Results JSON (stdout if omitted)");
  oracle_cmd->add_option("--limit", oracle_limit, "Use only the first N environments");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "Relative AC-magnetometry sensitivity comparison");
  std::string sens_envs, sens_strategies = "FID,Hahn,CPMG,UDD", sens_train, sens_out, sens_summary;
  double sens_time = 0.0, sens_omega = kDefaultSignalOmega, sens_floor = kDefaultFilterFloor;
  std::size_t sens_limit = 0;
  sens->add_option("--envs", sens_envs, "Environments JSON")->required();
  sens->add_option("--T", sens_time, "Total time in us")->required();
  sens->add_option("--omega-s", sens_omega, "Signal angular frequency, rad/us (default 2*pi*1.0)");
  sens->add_option("--strategies", sens_strategies, "Comma-separated uniform strategies");
  sens->add_option("--train-results", sens_train, "Train results JSON; adds the 'trained' strategy");
  sens->add_option("--filter-floor", sens_floor, "Minimum |Y(omega_s)| in us");
  sens->add_option("--out", sens_out, "Per-environment CSV (stdout if omitted)");
  sens->add_option("--summary", sens_summary, "Summary JSON");
  sens->add_option("--limit", sens_limit, "Use only the first N environments");

  // fit-nsd
  auto* fit = app.add_subcommand("fit-nsd", "Joint Ramsey/CPMG fit of a three-component NSD");
  std::string fit_data, fit_init, fit_bounds, fit_out;
  fit->add_option("--data", fit_data, "Decay CSV: label,time_us,coherence[,weight]")->required();
  fit->add_option("--init", fit_init, "Initial guess JSON {y0,a_g,v_g,w_g,a_1f}")->required();
  fit->add_option("--bounds", fit_bounds, "Bounds JSON {lower:{...}, upper:{...}}");
  fit->add_option("--out", fit_out, "Fit result JSON (stdout if omitted)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Post-hoc analyses of result files");
  std::string analyze_kind, analyze_results, analyze_oracle, analyze_out;
  std::optional<double> analyze_time;
  std::size_t analyze_lag = 10;
  analyze->add_option("kind", analyze_kind, "proportions | autocorr | cdf | normalized")
      ->required()
      ->check(CLI::IsMember({"proportions", "autocorr", "cdf", "normalized"}));
  analyze->add_option("--results", analyze_results, "Result JSON file or directory")->required();
  analyze->add_option("--oracle", analyze_oracle, "Oracle results (for normalized)");
  analyze->add_option("--T", analyze_time, "Time in us (cdf, autocorr)");
  analyze->add_option("--max-lag", analyze_lag, "Largest lag (autocorr)");
  analyze->add_option("--out", analyze_out, "Output CSV (stdout if omitted)");

  // cache-stats
  auto* stats = app.add_subcommand("cache-stats", "Inspect a transform cache file");
  std::string stats_path;
  stats->add_option("path", stats_path, "Cache file (defaults to --cache)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ddtune: error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    const FrequencyGrid grid = resolve_grid(g);
    const double dt = delta_t_or_default(g);
    const int pulses = pulses_or_default(g);

    if (*sample) {
      EnvironmentSampler sampler;
      if (!sample_config.empty()) sampler = sampler_from_json(read_json_file(sample_config));
      if (g.seed) sampler.seed = *g.seed;
      if (sample_count) sampler.count = *sample_count;
      const auto envs = sample_environments(sampler);
      write_json_file(sample_out, environments_to_json(envs));
      write_sidecar(sample_out, "sample-envs", {{"sampler", to_json(sampler)}});
      std::cout << "sampled " << envs.size() << " environments (seed " << sampler.seed << ") -> " << sample_out
                << "\n";
      return 0;
    }

    if (*eval) {
      const auto envs = load_environments(eval_envs, eval_limit);
      const std::size_t n = segments_for_time(eval_time, dt);
      std::map<std::size_t, DdSequence> per_env;
      std::optional<DdSequence> shared;
      std::string label;
      if (!eval_strategy.empty()) {
        shared = DdSequence::uniform(parse_segment_kind(eval_strategy), n, dt, pulses);
        label = eval_strategy;
      } else if (!eval_sequence.empty()) {
        const auto j = read_json_file(eval_sequence);
        if (j.is_array()) {
          per_env = sequences_at(load_records(eval_sequence), eval_time, g);
          label = "trained";
        } else {
          shared = sequence_from_json(j, pulses);
          label = "sequence";
        }
      } else {
        throw ConfigError("eval: give --strategy or --sequence");
      }
      if (shared && std::abs(shared->total_time() - eval_time) > 1e-9)
        throw ConfigError("eval: sequence length does not match --T");
      CacheSession session(g);
      std::vector<CoherenceResult> results(envs.size());
      std::vector<bool> present(envs.size(), false);
      parallel_for(envs.size(), g.parallel, [&](std::size_t i) {
        const DdSequence* seq = nullptr;
        if (shared) {
          seq = &*shared;
        } else if (auto it = per_env.find(i); it != per_env.end()) {
          seq = &it->second;
        }
        if (!seq) return;
        results[i] = coherence(*seq, envs[i], grid, session.get(), label, std::to_string(i));
        present[i] = true;
      });
      std::ostringstream csv;
      csv << "sequence_id,nsd_id,T,chi,w\n";
      double sum = 0.0, lo = 1.0, hi = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < envs.size(); ++i) {
        if (!present[i]) continue;
        const auto& r = results[i];
        csv << r.sequence_id << ',' << r.nsd_id << ',' << format_double(eval_time) << ',' << format_double(r.chi)
            << ',' << format_double(r.w) << '\n';
        sum += r.w;
        lo = std::min(lo, r.w);
        hi = std::max(hi, r.w);
        ++count;
      }
      if (count == 0) throw ConfigError("eval: no sequences found for T = " + format_double(eval_time));
      emit(eval_out, csv.str());
      session.finish();
      const json summary = {{"strategy", label}, {"T", eval_time}, {"count", count},
                            {"mean", sum / static_cast<double>(count)}, {"min", lo}, {"max", hi},
                            {"cache", session.stats()}};
      (eval_out.empty() ? std::cerr : std::cout) << summary.dump() << "\n";
      return 0;
    }

    if (*train_cmd) {
      const auto envs = load_environments(train_envs, train_limit);
      TrainConfig config;
      if (!train_config_path.empty()) config = train_config_from_json(read_json_file(train_config_path));
      config.delta_t = g.delta_t.value_or(config.delta_t);
      config.pulses_per_segment = g.pulses_per_segment.value_or(config.pulses_per_segment);
      if (g.seed) config.seed = *g.seed;
      if (!g.grid.empty()) config.grid = grid;
      if (train_greedy_only) config.greedy_only = true;
      config.validate();
      segments_for_time(train_tmax, config.delta_t);
      CacheSession session(g);
      const auto results = train_environments(envs, config, train_tmax, session.get(), g.parallel);
      json out = json::array();
      std::ostringstream log;
      log << "env_id,T,episode,epsilon,reward\n";
      for (std::size_t e = 0; e < results.size(); ++e) {
        for (const auto& r : results[e]) {
          out.push_back(train_record(e, r));
          if (!train_log.empty()) {
            for (const auto& ep : r.episodes)
              log << e << ',' << format_double(r.target_time) << ',' << ep.episode << ',' << format_double(ep.epsilon)
                  << ',' << format_double(ep.reward) << '\n';
          }
        }
      }
      write_json_file(train_out, out);
      if (!train_log.empty()) write_text_file(train_log, log.str());
      session.finish();
      write_sidecar(train_out, "train", {{"config", to_json(config)}, {"T_max", train_tmax}, {"parallel", g.parallel}});
      std::cout << json{{"records", out.size()}, {"environments", envs.size()}, {"cache", session.stats()}}.dump()
                << "\n";
      return 0;
    }

    if (*oracle_cmd) {
      const auto envs = load_environments(oracle_envs, oracle_limit);
      std::size_t n = 0;
      if (oracle_n) {
        n = *oracle_n;
      } else if (oracle_time) {
        n = segments_for_time(*oracle_time, dt);
      } else {
        throw ConfigError("oracle: give --N or --T");
      }
      if (n < 1) throw ConfigError("oracle: N must be >= 1");
      OracleConfig oc;
      oc.delta_t = dt;
      oc.pulses_per_segment = pulses;
      oc.grid = grid;
      oc.depth = oracle_depth;
      oc.exhaustive_limit = oracle_exhaustive_limit;
      auto mode_for = [&](std::size_t k) {
        if (oracle_mode == "exhaustive") return OracleMode::exhaustive;
        if (oracle_mode == "incremental") return OracleMode::incremental;
        if (oracle_mode == "auto") return k <= oc.exhaustive_limit ? OracleMode::exhaustive : OracleMode::incremental;
        throw ConfigError("oracle: --mode must be exhaustive, incremental or auto");
      };
      if (mode_for(n) == OracleMode::exhaustive && n > oc.exhaustive_limit) {
        throw ConfigError("oracle: N = " + std::to_string(n) + " exceeds the exhaustive limit of " +
                          std::to_string(oc.exhaustive_limit) + "; use --mode incremental");
      }
      CacheSession session(g);
      std::vector<std::vector<OracleResult>> per_env(envs.size());
      parallel_for(envs.size(), g.parallel, [&](std::size_t i) {
        for (std::size_t k = oracle_ladder ? 1 : n; k <= n; ++k) {
          const auto mode = mode_for(k);
          per_env[i].push_back(mode == OracleMode::exhaustive ? oracle_exhaustive(envs[i], k, session.get(), oc)
                                                              : oracle_incremental(envs[i], k, session.get(), oc));
        }
      });
      json out = json::array();
      for (std::size_t i = 0; i < per_env.size(); ++i) {
        for (const auto& r : per_env[i]) {
          out.push_back({{"env_id", i},
                         {"T", r.best_sequence.total_time()},
                         {"actions", actions_to_json(r.best_sequence.actions())},
                         {"delta_t", r.best_sequence.delta_t()},
                         {"pulses_per_segment", r.best_sequence.pulses_per_segment()},
                         {"coherence", r.best_coherence},
                         {"mode", to_string(r.mode)},
                         {"evaluated_count", r.evaluated_count}});
        }
      }
      emit(oracle_out, out.dump(2) + "\n");
      session.finish();
      write_sidecar(oracle_out, "oracle", {{"mode", oracle_mode}, {"depth", oracle_depth}});
      return 0;
    }

    if (*sens) {
      const auto envs = load_environments(sens_envs, sens_limit);
      const std::size_t n = segments_for_time(sens_time, dt);
      std::vector<Strategy> strategies;
      std::stringstream names(sens_strategies);
      for (std::string name; std::getline(names, name, ',');) {
        if (name.empty()) continue;
        strategies.push_back({name, {DdSequence::uniform(parse_segment_kind(name), n, dt, pulses)}});
      }
      if (!sens_train.empty()) {
        const auto per_env = sequences_at(load_records(sens_train), sens_time, g);
        Strategy trained{"trained", {}};
        for (std::size_t i = 0; i < envs.size(); ++i) {
          auto it = per_env.find(i);
          if (it == per_env.end())
            throw ConfigError("sensitivity: no trained sequence for env " + std::to_string(i) + " at T = " +
                              format_double(sens_time));
          trained.sequences.push_back(it->second);
        }
        strategies.push_back(std::move(trained));
      }
      CacheSession session(g);
      const auto cmp = compare_strategies(strategies, envs, sens_omega, grid, session.get(), sens_floor);
      std::ostringstream csv;
      csv << "strategy,env_id,T,omega_s,w,y_mag,M\n";
      for (const auto& r : cmp.records) {
        csv << r.strategy << ',' << r.env_id << ',' << format_double(r.result.total_time) << ','
            << format_double(r.result.omega_s) << ',' << format_double(r.result.w) << ','
            << format_double(r.result.y_mag) << ',' << format_double(r.result.metric_m) << '\n';
      }
      emit(sens_out, csv.str());
      json summary = json::array();
      for (const auto& s : cmp.summaries) {
        summary.push_back({{"strategy", s.strategy},
                           {"geometric_mean_M", format_double(s.geometric_mean_m)},
                           {"arithmetic_mean_M", format_double(s.arithmetic_mean_m)},
                           {"ratio_to_best", format_double(s.ratio_to_best)},
                           {"filter_blind", s.blind_count},
                           {"environments", s.environments}});
      }
      if (!sens_summary.empty()) {
        write_json_file(sens_summary, {{"T", sens_time}, {"omega_s", sens_omega}, {"strategies", summary}});
      } else {
        (sens_out.empty() ? std::cerr : std::cout) << summary.dump() << "\n";
      }
      session.finish();
      return 0;
    }

    if (*fit) {
      const auto datasets = datasets_from_csv(read_text_file(fit_data));
      const auto init = three_component_from_json(read_json_file(fit_init));
      FitBounds bounds = FitBounds::around(init);
      if (!fit_bounds.empty()) {
        const auto b = read_json_file(fit_bounds);
        if (!b.contains("lower") || !b.contains("upper")) throw ConfigError("bounds: need 'lower' and 'upper'");
        bounds.lower = three_component_from_json(b.at("lower"));
        bounds.upper = three_component_from_json(b.at("upper"));
      }
      CacheSession session(g);
      const auto result = fit_nsd(datasets, bounds, init, grid, session.get());
      emit(fit_out, to_json(result, datasets).dump(2) + "\n");
      session.finish();
      return 0;
    }

    if (*analyze) {
      const auto records = load_records(analyze_results);
      if (records.empty()) throw ConfigError("analyze: no result records in " + analyze_results);
      std::ostringstream csv;
      if (analyze_kind == "proportions") {
        std::map<double, std::vector<DdSequence>> by_time;
        for (const auto& r : records) by_time[r.at("T").get<double>()].push_back(record_sequence(r, g));
        csv << "T,FID,Hahn,CPMG,UDD\n";
        for (const auto& [t, seqs] : by_time) {
          const auto p = subsequence_proportions(seqs);
          csv << format_double(t);
          for (double v : p) csv << ',' << format_double(v);
          csv << '\n';
        }
      } else if (analyze_kind == "autocorr") {
        double t = 0.0;
        for (const auto& r : records) t = std::max(t, r.at("T").get<double>());
        if (analyze_time) t = *analyze_time;
        std::vector<DdSequence> seqs;
        for (const auto& [id, s] : sequences_at(records, t, g)) seqs.push_back(s);
        const auto ac = sequence_autocorrelation(seqs, analyze_lag);
        csv << "lag,mean_correlation\n";
        for (std::size_t k = 0; k < ac.size(); ++k) csv << k << ',' << format_double(ac[k]) << '\n';
      } else if (analyze_kind == "cdf") {
        if (!analyze_time) throw ConfigError("analyze cdf: --T is required");
        csv << "coherence,cumulative_fraction\n";
        for (const auto& [v, f] : coherence_cdf(coherence_records(records), *analyze_time))
          csv << format_double(v) << ',' << format_double(f) << '\n';
      } else {
        if (analyze_oracle.empty()) throw ConfigError("analyze normalized: --oracle is required");
        const auto norm = normalized_coherence(coherence_records(records), coherence_records(load_records(analyze_oracle)));
        csv << "T,normalized_coherence\n";
        for (const auto& [t, v] : norm) csv << format_double(t) << ',' << format_double(v) << '\n';
      }
      emit(analyze_out, csv.str());
      return 0;
    }

    if (*stats) {
      const std::string path = stats_path.empty() ? g.cache_path : stats_path;
      if (path.empty()) throw ConfigError("cache-stats: give a cache path");
      const auto cache = load_cache(path);
      const auto s = cache.stats();
      std::cout << json{{"path", path},
                        {"entries", s.entries},
                        {"hits", s.hits},
                        {"misses", s.misses},
                        {"file_size", fs::file_size(path)},
                        {"points_per_reference", cache.quadrature().points_per_reference},
                        {"rule", cache.quadrature().rule == QuadratureRule::filon_trapezoid ? "filon" : "trapezoid"}}
                       .dump()
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "ddtune: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
