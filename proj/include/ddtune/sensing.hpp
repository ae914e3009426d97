#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ddtune/coherence.hpp"
#include "ddtune/errors.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

/// 1.0 MHz target field expressed as angular frequency in rad/us.
inline constexpr double kDefaultSignalOmega = 2.0 * std::numbers::pi * 1.0;
inline constexpr double kDefaultFilterFloor = 1e-12;

struct SensitivityResult {
  /// sqrt(T) / (W |Y(omega_s, T)|); lower is better. +inf when W underflows.
  double metric_m = 0.0;
  double total_time = 0.0;
  double omega_s = 0.0;
  double w = 0.0;
  double y_mag = 0.0;
};

template <SpectralDensity Nsd>
SensitivityResult sensitivity_metric(const DdSequence& seq, const Nsd& nsd, double omega_s,
                                     const FrequencyGrid& grid, TransformCache& cache,
                                     double filter_floor = kDefaultFilterFloor) {
  if (!(omega_s > 0.0)) throw DomainError("sensitivity: omega_s must be > 0");
  SensitivityResult r;
  r.total_time = seq.total_time();
  r.omega_s = omega_s;
  r.y_mag = std::abs(sequence_fourier(seq, omega_s, cache));
  if (!(r.y_mag >= filter_floor)) {
    throw FilterBlindError("sequence " + seq.to_string().substr(0, 64) + " is filter-blind at omega_s = " +
                           std::to_string(omega_s) + " rad/us (|Y| = " + std::to_string(r.y_mag) + ")");
  }
  r.w = coherence(seq, nsd, grid, cache).w;
  r.metric_m = r.w > 0.0 ? std::sqrt(r.total_time) / (r.w * r.y_mag)
                         : std::numeric_limits<double>::infinity();
  return r;
}

/// A named strategy: one sequence per environment, or a single shared one.
struct Strategy {
  std::string name;
  std::vector<DdSequence> sequences;

  const DdSequence& for_environment(std::size_t i) const {
    return sequences.size() == 1 ? sequences.front() : sequences.at(i);
  }
};

struct SensitivityRecord {
  std::string strategy;
  std::size_t env_id = 0;
  SensitivityResult result;
  bool filter_blind = false;
};

struct StrategySummary {
  std::string strategy;
  /// exp(mean log M); +inf if any environment is filter-blind or decohered.
  double geometric_mean_m = 0.0;
  double arithmetic_mean_m = 0.0;
  double ratio_to_best = 1.0;
  std::size_t blind_count = 0;
  std::size_t environments = 0;
};

struct StrategyComparison {
  std::vector<SensitivityRecord> records;
  std::vector<StrategySummary> summaries;
};

/// Per-strategy aggregate of M across environments, with ratios to the best
/// geometric mean. Filter-blind pairs are recorded with M = +inf.
template <SpectralDensity Nsd>
StrategyComparison compare_strategies(const std::vector<Strategy>& strategies, const std::vector<Nsd>& environments,
                                      double omega_s, const FrequencyGrid& grid, TransformCache& cache,
                                      double filter_floor = kDefaultFilterFloor) {
  if (strategies.empty() || environments.empty())
    throw ConfigError("compare_strategies: need at least one strategy and one environment");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  StrategyComparison out;
  for (const auto& strategy : strategies) {
    StrategySummary summary;
    summary.strategy = strategy.name;
    summary.environments = environments.size();
    double log_sum = 0.0;
    double sum = 0.0;
    for (std::size_t e = 0; e < environments.size(); ++e) {
      const DdSequence& seq = strategy.for_environment(e);
      SensitivityRecord rec;
      rec.strategy = strategy.name;
      rec.env_id = e;
      try {
        rec.result = sensitivity_metric(seq, environments[e], omega_s, grid, cache, filter_floor);
      } catch (const FilterBlindError&) {
        rec.filter_blind = true;
        rec.result.total_time = seq.total_time();
        rec.result.omega_s = omega_s;
        rec.result.y_mag = std::abs(sequence_fourier(seq, omega_s, cache));
        rec.result.w = coherence(seq, environments[e], grid, cache).w;
        rec.result.metric_m = kInf;
        ++summary.blind_count;
      }
      log_sum += std::log(rec.result.metric_m);
      sum += rec.result.metric_m;
      out.records.push_back(rec);
    }
    const auto n = static_cast<double>(environments.size());
    summary.geometric_mean_m = std::exp(log_sum / n);
    summary.arithmetic_mean_m = sum / n;
    out.summaries.push_back(summary);
  }
  double best = kInf;
  for (const auto& s : out.summaries) best = std::min(best, s.geometric_mean_m);
  for (auto& s : out.summaries) {
    s.ratio_to_best = std::isfinite(best) ? s.geometric_mean_m / best : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace ddtune
