#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddtune/coherence.hpp"
#include "ddtune/errors.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

enum class OracleMode { exhaustive, incremental };

constexpr const char* to_string(OracleMode mode) {
  return mode == OracleMode::exhaustive ? "exhaustive" : "incremental";
}

struct OracleConfig {
  double delta_t = kDefaultSegmentDuration;
  int pulses_per_segment = kDefaultPulsesPerSegment;
  FrequencyGrid grid;
  std::size_t exhaustive_limit = 8;
  std::size_t depth = 2;
};

struct OracleStep {
  std::size_t prefix_length = 0;  // after committing this step
  double lookahead_coherence = 0.0;
  double prefix_coherence = 0.0;
};

struct OracleResult {
  DdSequence best_sequence;
  double best_coherence = 0.0;
  std::uint64_t evaluated_count = 0;
  OracleMode mode = OracleMode::exhaustive;
  std::vector<OracleStep> steps;
};

namespace detail {

/// Depth-first enumeration of every length-`depth` extension of `prefix`.
/// Extensions are visited in lexicographic code order and only strictly better
/// candidates replace the incumbent, so ties keep the smallest action list.
class ExtensionSearch {
 public:
  ExtensionSearch(const CoherenceEvaluator& evaluator, double delta_t, int pulses)
      : evaluator_(evaluator), delta_t_(delta_t), pulses_(pulses) {}

  void run(const std::vector<SegmentKind>& prefix, std::size_t depth) {
    const DdSequence base(prefix, delta_t_, pulses_);
    SpectrumAccumulator acc(evaluator_.grid());
    acc.append_all(base, evaluator_.cache());
    actions_ = prefix;
    best_value_ = -1.0;
    best_.clear();
    recurse(acc, base.exit_parity(), depth);
  }

  const std::vector<SegmentKind>& best() const { return best_; }
  double best_value() const { return best_value_; }
  std::uint64_t evaluated() const { return evaluated_; }

 private:
  void recurse(const SpectrumAccumulator& acc, int parity, std::size_t remaining) {
    if (remaining == 0) {
      const double w = evaluator_.coherence(acc);
      ++evaluated_;
      if (w > best_value_) {
        best_value_ = w;
        best_ = actions_;
      }
      return;
    }
    const std::size_t k = actions_.size();
    const double t0 = static_cast<double>(k) * delta_t_;
    const double t1 = static_cast<double>(k + 1) * delta_t_;
    for (auto kind : kAllSegmentKinds) {
      const Segment seg = make_segment(kind, t0, t1, pulses_);
      SpectrumAccumulator next = acc;
      next.append(seg, parity, evaluator_.cache());
      actions_.push_back(kind);
      recurse(next, parity * segment_parity(seg), remaining - 1);
      actions_.pop_back();
    }
  }

  const CoherenceEvaluator& evaluator_;
  double delta_t_;
  int pulses_;
  std::vector<SegmentKind> actions_;
  std::vector<SegmentKind> best_;
  double best_value_ = -1.0;
  std::uint64_t evaluated_ = 0;
};

}  // namespace detail

/// Best of all 4^N sequences; ties resolve to the lexicographically smallest.
template <SpectralDensity Nsd>
OracleResult oracle_exhaustive(const Nsd& nsd, std::size_t n_segments, TransformCache& cache,
                               const OracleConfig& config = {}) {
  if (n_segments < 1) throw ConfigError("oracle: N must be >= 1");
  if (n_segments > config.exhaustive_limit) {
    throw ConfigError("oracle: N = " + std::to_string(n_segments) + " exceeds the exhaustive limit of " +
                      std::to_string(config.exhaustive_limit) + "; use incremental mode");
  }
  const CoherenceEvaluator evaluator(nsd, config.grid, cache);
  detail::ExtensionSearch search(evaluator, config.delta_t, config.pulses_per_segment);
  search.run({}, n_segments);
  OracleResult r;
  r.best_sequence = DdSequence(search.best(), config.delta_t, config.pulses_per_segment);
  r.best_coherence = search.best_value();
  r.evaluated_count = search.evaluated();
  r.mode = OracleMode::exhaustive;
  return r;
}

/// Grows the sequence one segment at a time. Each step enumerates every
/// extension of depth min(d, remaining), then commits the first segment of
/// the best one.
template <SpectralDensity Nsd>
OracleResult oracle_incremental(const Nsd& nsd, std::size_t n_segments, TransformCache& cache,
                                const OracleConfig& config = {}) {
  if (n_segments < 1) throw ConfigError("oracle: N must be >= 1");
  if (config.depth < 1) throw ConfigError("oracle: depth must be >= 1");
  const CoherenceEvaluator evaluator(nsd, config.grid, cache);
  detail::ExtensionSearch search(evaluator, config.delta_t, config.pulses_per_segment);
  std::vector<SegmentKind> prefix;
  OracleResult r;
  r.mode = OracleMode::incremental;
  while (prefix.size() < n_segments) {
    const std::size_t d = std::min(config.depth, n_segments - prefix.size());
    search.run(prefix, d);
    const double lookahead = search.best_value();
    prefix.push_back(search.best()[prefix.size()]);
    const DdSequence committed(prefix, config.delta_t, config.pulses_per_segment);
    r.steps.push_back({prefix.size(), lookahead, evaluator.coherence(committed)});
  }
  r.evaluated_count = search.evaluated();
  r.best_sequence = DdSequence(prefix, config.delta_t, config.pulses_per_segment);
  r.best_coherence = evaluator.coherence(r.best_sequence);
  return r;
}

/// Exhaustive up to the configured limit, incremental beyond it.
template <SpectralDensity Nsd>
OracleResult oracle_auto(const Nsd& nsd, std::size_t n_segments, TransformCache& cache,
                         const OracleConfig& config = {}) {
  return n_segments <= config.exhaustive_limit ? oracle_exhaustive(nsd, n_segments, cache, config)
                                               : oracle_incremental(nsd, n_segments, cache, config);
}

}  // namespace ddtune
