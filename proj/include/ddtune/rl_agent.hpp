#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ddtune/coherence.hpp"
#include "ddtune/errors.hpp"
#include "ddtune/rng.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

inline constexpr int kPaddingCode = -1;

/// The last m actions, left-padded with -1.
struct AggregatedState {
  std::vector<int> history;

  /// Base-5 packing of (code + 1); unique for m <= 27.
  std::uint64_t encode() const {
    std::uint64_t key = 0;
    for (int c : history) key = key * 5 + static_cast<std::uint64_t>(c + 1);
    return key;
  }

  static AggregatedState decode(std::uint64_t key, std::size_t m) {
    AggregatedState s;
    s.history.assign(m, kPaddingCode);
    for (std::size_t i = m; i-- > 0;) {
      s.history[i] = static_cast<int>(key % 5) - 1;
      key /= 5;
    }
    return s;
  }

  friend bool operator==(const AggregatedState&, const AggregatedState&) = default;
};

inline AggregatedState aggregate_state(const std::vector<SegmentKind>& partial, std::size_t m) {
  if (m < 1) throw ConfigError("aggregate_state: m must be >= 1");
  AggregatedState s;
  s.history.assign(m, kPaddingCode);
  const std::size_t take = std::min(m, partial.size());
  for (std::size_t i = 0; i < take; ++i) {
    s.history[m - take + i] = to_code(partial[partial.size() - take + i]);
  }
  return s;
}

/// Tabular action values; unseen entries read as 0.
class QTable {
 public:
  using Row = std::array<double, kNumSegmentKinds>;

  Row row(const AggregatedState& s) const { return row(s.encode()); }

  Row row(std::uint64_t key) const {
    auto it = table_.find(key);
    return it == table_.end() ? Row{} : it->second;
  }

  double value(const AggregatedState& s, SegmentKind a) const {
    return row(s)[static_cast<std::size_t>(to_code(a))];
  }

  double& at(const AggregatedState& s, SegmentKind a) {
    return table_[s.encode()][static_cast<std::size_t>(to_code(a))];
  }

  std::size_t state_count() const { return table_.size(); }

  /// Rows ordered by packed state key.
  std::vector<std::pair<std::uint64_t, Row>> snapshot() const {
    std::vector<std::pair<std::uint64_t, Row>> out(table_.begin(), table_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  void set_row(std::uint64_t key, const Row& r) { table_[key] = r; }

 private:
  std::unordered_map<std::uint64_t, Row> table_;
};

struct TrainConfig {
  double delta_t = kDefaultSegmentDuration;
  int pulses_per_segment = kDefaultPulsesPerSegment;
  std::size_t m = 3;
  double alpha = 0.1;
  double eps_start = 1.0;
  double eps_decay = 0.99;
  double eps_end = 0.05;
  std::size_t n_episodes = 300;
  std::uint64_t seed = 0;
  std::vector<SegmentKind> base_sequence;
  /// Return the final greedy rollout even when a sampled episode scored higher.
  bool greedy_only = false;
  FrequencyGrid grid;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("train: alpha must be in (0, 1]");
    if (!(eps_end >= 0.0 && eps_end <= eps_start && eps_start <= 1.0))
      throw ConfigError("train: need 0 <= eps_end <= eps_start <= 1");
    if (!(eps_decay > 0.0 && eps_decay <= 1.0)) throw ConfigError("train: eps_decay must be in (0, 1]");
    if (m < 1 || m > 27) throw ConfigError("train: m must be in [1, 27]");
    if (!(delta_t > 0.0)) throw ConfigError("train: delta_t must be > 0");
    grid.validate();
  }
};

struct EpisodeRecord {
  std::size_t episode = 0;
  double epsilon = 0.0;
  double reward = 0.0;
};

struct TrainResult {
  DdSequence best_sequence;
  double best_reward = 0.0;
  double target_time = 0.0;
  QTable q_table;
  std::vector<EpisodeRecord> episodes;
  double final_epsilon = 0.0;
  /// "greedy" or "episode": which candidate was returned.
  std::string source;
  double greedy_reward = 0.0;
  double best_episode_reward = 0.0;
};

using Visit = std::pair<AggregatedState, SegmentKind>;

/// Epsilon-greedy choice; argmax ties go to the lowest code.
inline SegmentKind select_action(const QTable& q, const AggregatedState& state, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("select_action: epsilon must be in [0, 1]");
  if (epsilon > 0.0 && rng.uniform01() < epsilon) {
    return kind_from_code(static_cast<int>(rng.uniform_index(kNumSegmentKinds)));
  }
  const auto row = q.row(state);
  std::size_t best = 0;
  for (std::size_t a = 1; a < row.size(); ++a) {
    if (row[a] > row[best]) best = a;
  }
  return kind_from_code(static_cast<int>(best));
}

/// Q <- Q + alpha (r - Q) for each visited pair, in visit order.
inline void monte_carlo_update(QTable& q, const std::vector<Visit>& visited, double reward, double alpha) {
  for (const auto& [state, action] : visited) {
    double& v = q.at(state, action);
    v += alpha * (reward - v);
  }
}

struct EpisodeOutcome {
  DdSequence sequence;
  double reward = 0.0;
  std::vector<Visit> visited;
};

namespace detail {

/// Episode core; `prefix` holds the accumulated spectrum of the base sequence.
inline EpisodeOutcome run_episode_from(const TrainConfig& config, const QTable& q,
                                       const CoherenceEvaluator& evaluator,
                                       const SpectrumAccumulator& prefix, std::size_t target_n,
                                       double epsilon, Rng& rng) {
  std::vector<SegmentKind> actions = config.base_sequence;
  EpisodeOutcome out;
  out.visited.reserve(target_n - actions.size());
  for (std::size_t k = actions.size(); k < target_n; ++k) {
    auto state = aggregate_state(actions, config.m);
    const SegmentKind a = select_action(q, state, epsilon, rng);
    out.visited.emplace_back(std::move(state), a);
    actions.push_back(a);
  }
  out.sequence = DdSequence(std::move(actions), config.delta_t, config.pulses_per_segment);
  SpectrumAccumulator acc = prefix;
  const std::size_t base_len = config.base_sequence.size();
  for (std::size_t k = base_len; k < out.sequence.size(); ++k) {
    acc.append(out.sequence.segments()[k], out.sequence.entry_parity(k), evaluator.cache());
  }
  out.reward = evaluator.coherence(acc);
  return out;
}

inline SpectrumAccumulator base_prefix(const TrainConfig& config, const CoherenceEvaluator& evaluator) {
  SpectrumAccumulator acc(evaluator.grid());
  acc.append_all(DdSequence(config.base_sequence, config.delta_t, config.pulses_per_segment),
                 evaluator.cache());
  return acc;
}

}  // namespace detail

/// One episode: extend the base sequence to `target_n` segments and score it.
template <SpectralDensity Nsd>
EpisodeOutcome run_episode(const TrainConfig& config, const QTable& q, const Nsd& nsd, std::size_t target_n,
                           TransformCache& cache, Rng& rng, double epsilon) {
  if (config.base_sequence.size() > target_n)
    throw ConfigError("run_episode: base sequence longer than target");
  const CoherenceEvaluator evaluator(nsd, config.grid, cache);
  const auto prefix = detail::base_prefix(config, evaluator);
  return detail::run_episode_from(config, q, evaluator, prefix, target_n, epsilon, rng);
}

/// Monte Carlo Q-learning for one target time, warm-started from config.base_sequence.
///
/// The returned sequence is the better of the final greedy rollout and the
/// best sampled episode (ties favour the greedy rollout), unless greedy_only.
template <SpectralDensity Nsd>
TrainResult train(const TrainConfig& config, const Nsd& nsd, double target_time, TransformCache& cache) {
  config.validate();
  const std::size_t target_n = segments_for_time(target_time, config.delta_t);
  if (config.base_sequence.size() > target_n)
    throw ConfigError("train: base sequence longer than target");

  const CoherenceEvaluator evaluator(nsd, config.grid, cache);
  const auto prefix = detail::base_prefix(config, evaluator);
  Rng rng(config.seed);

  TrainResult result;
  result.target_time = target_time;
  result.episodes.reserve(config.n_episodes);
  double epsilon = config.eps_start;
  EpisodeOutcome best_episode;
  bool have_episode = false;
  for (std::size_t ep = 0; ep < config.n_episodes; ++ep) {
    auto outcome = detail::run_episode_from(config, result.q_table, evaluator, prefix, target_n, epsilon, rng);
    monte_carlo_update(result.q_table, outcome.visited, outcome.reward, config.alpha);
    result.episodes.push_back({ep, epsilon, outcome.reward});
    if (!have_episode || outcome.reward > best_episode.reward) {
      best_episode = std::move(outcome);
      have_episode = true;
    }
    epsilon = std::max(config.eps_end, epsilon * config.eps_decay);
  }
  result.final_epsilon = epsilon;

  auto greedy = detail::run_episode_from(config, result.q_table, evaluator, prefix, target_n, 0.0, rng);
  result.greedy_reward = greedy.reward;
  result.best_episode_reward = have_episode ? best_episode.reward : greedy.reward;
  if (config.greedy_only || !have_episode || greedy.reward >= best_episode.reward) {
    result.best_sequence = std::move(greedy.sequence);
    result.source = "greedy";
  } else {
    result.best_sequence = std::move(best_episode.sequence);
    result.source = "episode";
  }
  result.best_reward = evaluator.coherence(result.best_sequence);
  return result;
}

/// Trains T = dt, 2 dt, ..., T_max, each step warm-started from the previous winner.
///
/// Step k (1-based) uses seed derive_seed(config.seed, k). A non-empty
/// config.base_sequence starts the ladder after its length.
template <SpectralDensity Nsd>
std::vector<TrainResult> train_ladder(const TrainConfig& config, const Nsd& nsd, double max_time,
                                      TransformCache& cache) {
  const std::size_t n_max = segments_for_time(max_time, config.delta_t);
  TrainConfig step = config;
  std::vector<TrainResult> out;
  for (std::size_t k = config.base_sequence.size() + 1; k <= n_max; ++k) {
    step.seed = derive_seed(config.seed, k);
    auto r = train(step, nsd, static_cast<double>(k) * config.delta_t, cache);
    step.base_sequence = r.best_sequence.actions();
    out.push_back(std::move(r));
  }
  return out;
}

/// Greedy rollout from the empty history using only the table.
inline std::vector<SegmentKind> greedy_rollout(const QTable& q, std::vector<SegmentKind> base,
                                               std::size_t target_n, std::size_t m) {
  Rng unused(0);
  while (base.size() < target_n) base.push_back(select_action(q, aggregate_state(base, m), 0.0, unused));
  return base;
}

}  // namespace ddtune
