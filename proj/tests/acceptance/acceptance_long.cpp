#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ddtune/ddtune.hpp"

using namespace ddtune;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTmax = 200.0;
constexpr std::size_t kEnvironments = 100;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& detail) {
  std::printf("INFO %s\n", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main() {
  const auto start = Clock::now();
  EnvironmentSampler sampler;
  sampler.count = kEnvironments;
  sampler.seed = 9009;
  const auto envs = sample_environments(sampler);
  const FrequencyGrid grid;
  TransformCache cache;

  TrainConfig config;
  config.seed = 9009;
  const auto ladders = train_environments(envs, config, kTmax, cache, workers());
  const std::size_t n_final = segments_for_time(kTmax, config.delta_t);
  info(fmt("trained %zu environments up to T = %.0f us in %.1f s", envs.size(), kTmax,
           std::chrono::duration<double>(Clock::now() - start).count()));

  std::vector<DdSequence> trained;
  std::vector<double> trained_w;
  std::vector<double> cpmg_w;
  const auto cpmg = DdSequence::uniform(SegmentKind::cpmg, n_final);
  for (std::size_t i = 0; i < envs.size(); ++i) {
    trained.push_back(ladders[i].back().best_sequence);
    trained_w.push_back(ladders[i].back().best_reward);
    cpmg_w.push_back(coherence(cpmg, envs[i], grid, cache).w);
  }

  // Mean coherence at the longest time.
  {
    const double t = mean(trained_w);
    const double c = mean(cpmg_w);
    report(8, "mean coherence at T = 200 us", t >= 0.30 && c <= 0.25 && t - c >= 0.15,
           fmt("trained %.4f (need >= 0.30), pure CPMG %.4f (need <= 0.25), gap %.4f (need >= 0.15)", t, c, t - c));
  }

  // Normalized against the incremental oracle.
  {
    OracleConfig oc;
    oc.depth = 2;
    const auto oracle = oracle_environments(envs, n_final, OracleMode::incremental, cache, oc, workers());
    std::vector<CoherenceRecord> strategy_recs;
    std::vector<CoherenceRecord> oracle_recs;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      strategy_recs.push_back({i, kTmax, trained_w[i]});
      oracle_recs.push_back({i, kTmax, oracle[i].best_coherence});
    }
    const double norm = normalized_coherence(strategy_recs, oracle_recs).front().second;
    std::vector<CoherenceRecord> cpmg_recs;
    for (std::size_t i = 0; i < envs.size(); ++i) cpmg_recs.push_back({i, kTmax, cpmg_w[i]});
    const double cpmg_norm = normalized_coherence(cpmg_recs, oracle_recs).front().second;
    std::vector<double> ow;
    for (const auto& r : oracle) ow.push_back(r.best_coherence);
    report(9, "normalized coherence vs incremental oracle (d=2)", norm >= 0.70,
           fmt("trained / oracle = %.4f (need >= 0.70); oracle mean %.4f; pure CPMG / oracle = %.4f", norm, mean(ow),
               cpmg_norm));
  }

  // Sensitivity.
  {
    const std::vector<Strategy> strategies{{"trained", trained}, {"CPMG", {cpmg}}};
    const auto at_signal = compare_strategies(strategies, envs, kDefaultSignalOmega, grid, cache);
    const auto& tr = at_signal.summaries[0];
    const auto& cp = at_signal.summaries[1];
    const double ratio = cp.geometric_mean_m / tr.geometric_mean_m;
    const bool pass = std::isfinite(tr.geometric_mean_m) && std::isfinite(cp.geometric_mean_m) && ratio >= 2.0;
    report(10, "sensitivity at omega_s = 2 pi rad/us", pass,
           fmt("geometric-mean M trained %.4g, CPMG %.4g, CPMG/trained %.4g (need >= 2); filter-blind cases: "
               "trained %zu/%zu, CPMG %zu/%zu",
               tr.geometric_mean_m, cp.geometric_mean_m, ratio, tr.blind_count, tr.environments, cp.blind_count,
               cp.environments));
    const auto at_one = compare_strategies(strategies, envs, 1.0, grid, cache);
    info(fmt("sensitivity at omega_s = 1 rad/us: geometric-mean M trained %.4g, CPMG %.4g, CPMG/trained %.4g; "
             "arithmetic means %.4g and %.4g",
             at_one.summaries[0].geometric_mean_m, at_one.summaries[1].geometric_mean_m,
             at_one.summaries[1].geometric_mean_m / at_one.summaries[0].geometric_mean_m,
             at_one.summaries[0].arithmetic_mean_m, at_one.summaries[1].arithmetic_mean_m));
  }

  // Composition over the ladder.
  {
    double worst_fid = 0.0;
    for (const auto& seq : trained) worst_fid = std::max(worst_fid, subsequence_proportions({seq})[0]);
    std::vector<double> times;
    std::vector<double> cpmg_fraction;
    for (std::size_t k = 0; k < ladders.front().size(); ++k) {
      std::vector<DdSequence> at_k;
      for (const auto& ladder : ladders) at_k.push_back(ladder[k].best_sequence);
      times.push_back(ladders.front()[k].target_time);
      cpmg_fraction.push_back(subsequence_proportions(at_k)[2]);
    }
    const double trend = pearson(times, cpmg_fraction);
    const bool rises = trend >= 0.5 && cpmg_fraction.back() > cpmg_fraction.front();
    std::string samples;
    for (std::size_t k = 0; k < times.size(); k += 6) samples += fmt(" T=%.0f:%.3f", times[k], cpmg_fraction[k]);
    samples += fmt(" T=%.0f:%.3f", times.back(), cpmg_fraction.back());
    report(11, "composition (FID share, CPMG trend)", worst_fid < 0.02 && rises,
           fmt("max FID fraction in any trained sequence %.4f (need < 0.02); CPMG fraction vs T Pearson %.3f "
               "(need >= 0.5, rising end to end);%s",
               worst_fid, trend, samples.c_str()));
  }

  // Autocorrelation.
  {
    const auto ac = sequence_autocorrelation(trained, 10);
    double worst = 0.0;
    std::string lags;
    for (std::size_t k = 1; k < ac.size(); ++k) {
      worst = std::max(worst, std::abs(ac[k]));
      lags += fmt("%s%+.3f", k > 1 ? " " : "", ac[k]);
    }
    report(12, "autocorrelation of trained sequences", worst < 0.2,
           fmt("max |mean Pearson| over lags 1..10 = %.4f (need < 0.2); lags: %s", worst, lags.c_str()));
  }

  // Coherence distribution at an intermediate time.
  {
    std::vector<CoherenceRecord> recs;
    for (std::size_t i = 0; i < envs.size(); ++i)
      for (const auto& step : ladders[i])
        if (step.target_time == 48.0) recs.push_back({i, 48.0, step.best_reward});
    std::size_t high = 0;
    for (const auto& r : recs) high += r.coherence >= 0.8 ? 1 : 0;
    info(fmt("T = 48 us: %zu/%zu trained environments with coherence in [0.8, 1.0]", high, recs.size()));
  }

  info(fmt("total runtime %.1f s", std::chrono::duration<double>(Clock::now() - start).count()));
  std::printf("%d failing criteria\n", failures);
  return failures == 0 ? 0 : 1;
}
