#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ddtune/errors.hpp"
#include "ddtune/sequence.hpp"

namespace ddtune {

using KindFractions = std::array<double, kNumSegmentKinds>;

/// Fraction of segments of each kind, averaged over sequences (indexed by code).
inline KindFractions subsequence_proportions(const std::vector<DdSequence>& sequences) {
  if (sequences.empty()) throw ConfigError("subsequence_proportions: no sequences");
  KindFractions mean{};
  for (const auto& seq : sequences) {
    if (seq.empty()) throw ConfigError("subsequence_proportions: empty sequence");
    KindFractions counts{};
    for (auto k : seq.actions()) counts[static_cast<std::size_t>(to_code(k))] += 1.0;
    for (std::size_t i = 0; i < counts.size(); ++i) mean[i] += counts[i] / static_cast<double>(seq.size());
  }
  for (auto& v : mean) v /= static_cast<double>(sequences.size());
  return mean;
}

/// Pearson correlation of two equal-length series; 0 when either is constant.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Mean lag-k Pearson correlation of action codes, k = 0..max_lag.
///
/// Per sequence, codes at positions p and p+k are correlated over all valid
/// p; the per-sequence values are then averaged.
inline std::vector<double> sequence_autocorrelation(const std::vector<DdSequence>& sequences, std::size_t max_lag) {
  if (sequences.empty()) throw ConfigError("sequence_autocorrelation: no sequences");
  std::vector<double> mean(max_lag + 1, 0.0);
  for (const auto& seq : sequences) {
    if (seq.size() <= max_lag)
      throw ConfigError("sequence_autocorrelation: sequence length " + std::to_string(seq.size()) +
                        " must exceed max_lag " + std::to_string(max_lag));
    std::vector<double> codes;
    for (auto k : seq.actions()) codes.push_back(static_cast<double>(to_code(k)));
    mean[0] += 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
      const std::vector<double> head(codes.begin(), codes.end() - static_cast<std::ptrdiff_t>(lag));
      const std::vector<double> tail(codes.begin() + static_cast<std::ptrdiff_t>(lag), codes.end());
      mean[lag] += pearson(head, tail);
    }
  }
  for (auto& v : mean) v /= static_cast<double>(sequences.size());
  return mean;
}

/// One (environment, time) coherence outcome for some strategy.
struct CoherenceRecord {
  std::size_t env_id = 0;
  double total_time = 0.0;
  double coherence = 0.0;
};

/// Mean strategy coherence over mean oracle coherence, per time (ascending).
inline std::vector<std::pair<double, double>> normalized_coherence(const std::vector<CoherenceRecord>& results,
                                                                   const std::vector<CoherenceRecord>& oracle) {
  using Key = std::pair<double, std::size_t>;
  std::map<Key, double> strategy_by_key, oracle_by_key;
  for (const auto& r : results) strategy_by_key[{r.total_time, r.env_id}] = r.coherence;
  for (const auto& r : oracle) oracle_by_key[{r.total_time, r.env_id}] = r.coherence;
  std::string missing;
  for (const auto& [k, v] : strategy_by_key) {
    if (!oracle_by_key.contains(k))
      missing += " (env " + std::to_string(k.second) + ", T " + std::to_string(k.first) + ") missing from oracle;";
  }
  for (const auto& [k, v] : oracle_by_key) {
    if (!strategy_by_key.contains(k))
      missing += " (env " + std::to_string(k.second) + ", T " + std::to_string(k.first) + ") missing from results;";
  }
  if (!missing.empty()) throw ConfigError("normalized_coherence: unmatched keys:" + missing);

  std::map<double, std::pair<double, double>> sums;
  for (const auto& [k, v] : strategy_by_key) {
    sums[k.first].first += v;
    sums[k.first].second += oracle_by_key[k];
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [t, s] : sums) out.emplace_back(t, s.first / s.second);
  return out;
}

/// Empirical CDF at time T: (value, fraction of results <= value), ties merged.
inline std::vector<std::pair<double, double>> coherence_cdf(const std::vector<CoherenceRecord>& results,
                                                            double total_time) {
  std::vector<double> values;
  for (const auto& r : results)
    if (r.total_time == total_time) values.push_back(r.coherence);
  if (values.empty()) throw ConfigError("coherence_cdf: no results at T = " + std::to_string(total_time));
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return cdf;
}

}  // namespace ddtune
