#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ddtune/errors.hpp"
#include "ddtune/rng.hpp"
#include "ddtune/sequence.hpp"

namespace ddtune {

using Complex = std::complex<double>;

/// Uniform angular-frequency grid (rad/us) for the decoherence integral.
struct FrequencyGrid {
  double omega_min = 0.001;
  double omega_max = 8.5;
  std::size_t n_points = 4000;

  void validate() const {
    if (!(omega_min > 0.0)) throw ConfigError("grid: omega_min must be > 0");
    if (!(omega_max > omega_min)) throw ConfigError("grid: omega_max must exceed omega_min");
    if (n_points < 2) throw ConfigError("grid: n_points must be >= 2");
  }

  double spacing() const { return (omega_max - omega_min) / static_cast<double>(n_points - 1); }

  double at(std::size_t i) const {
    if (i + 1 == n_points) return omega_max;
    return omega_min + static_cast<double>(i) * (omega_max - omega_min) /
                           static_cast<double>(n_points - 1);
  }

  std::vector<double> points() const {
    std::vector<double> p(n_points);
    for (std::size_t i = 0; i < n_points; ++i) p[i] = at(i);
    return p;
  }

  /// Composite trapezoid weights over the actual node positions.
  std::vector<double> trapezoid_weights() const {
    const auto p = points();
    std::vector<double> w(n_points, 0.0);
    for (std::size_t i = 0; i + 1 < n_points; ++i) {
      const double half = 0.5 * (p[i + 1] - p[i]);
      w[i] += half;
      w[i + 1] += half;
    }
    return w;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

enum class QuadratureRule : std::uint32_t {
  /// Trapezoid on y(t) with the e^{-i w t} kernel integrated exactly per node
  /// interval. Exact for piecewise-constant modulation up to rounding.
  filon_trapezoid = 0,
  /// Plain composite trapezoid on y(t) e^{-i w t}.
  trapezoid = 1,
};

/// Time-domain quadrature settings. Node count scales with segment duration.
struct QuadratureConfig {
  QuadratureRule rule = QuadratureRule::filon_trapezoid;
  std::size_t points_per_reference = 2000;
  double reference_duration = 4.0;

  std::size_t nodes_for(double duration) const {
    const auto n = static_cast<long long>(
        std::llround(static_cast<double>(points_per_reference) * duration / reference_duration));
    return static_cast<std::size_t>(std::max<long long>(2, n));
  }

  friend bool operator==(const QuadratureConfig&, const QuadratureConfig&) = default;
};

namespace detail {

/// sum_{j < count} exp(-i omega (t0 + j h)), by recurrence with periodic exact resync.
inline Complex phase_sum(double omega, double t0, double h, std::size_t count) {
  constexpr std::size_t kResync = 64;
  const Complex step = std::polar(1.0, -omega * h);
  Complex acc{0.0, 0.0};
  Complex z;
  for (std::size_t j = 0; j < count; ++j) {
    if (j % kResync == 0) {
      z = std::polar(1.0, -omega * (t0 + static_cast<double>(j) * h));
    } else {
      z *= step;
    }
    acc += z;
  }
  return acc;
}

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace detail

/// Direct (uncached) quadrature of the segment's local modulation, starting at +1.
///
/// Nodes are laid out separately on every constant piece between pulses, so
/// each discontinuity sits on a node.
inline Complex integrate_segment(const Segment& seg, double omega, const QuadratureConfig& quad) {
  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(seg.n_pulses) + 2);
  breaks.push_back(seg.t_start);
  for (double p : pulse_times(seg)) breaks.push_back(p);
  breaks.push_back(seg.t_end);

  const double duration = seg.duration();
  const auto total_intervals = static_cast<double>(quad.nodes_for(duration) - 1);
  Complex sum{0.0, 0.0};
  double sign = 1.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    const double len = b - a;
    const auto m = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(total_intervals * len / duration)));
    const double h = len / static_cast<double>(m);
    Complex piece;
    if (quad.rule == QuadratureRule::filon_trapezoid) {
      piece = h * detail::sinc(0.5 * omega * h) * detail::phase_sum(omega, a + 0.5 * h, h, m);
    } else {
      const Complex ends = 0.5 * (std::polar(1.0, -omega * a) + std::polar(1.0, -omega * b));
      piece = h * (ends + detail::phase_sum(omega, a + h, h, m - 1));
    }
    sum += sign * piece;
    sign = -sign;
  }
  return sum;
}

/// Times are stored at 1e-9 us resolution.
inline std::int64_t quantize_time(double t) { return std::llround(t * 1e9); }

/// Identity of one memoized value: segment parameters, absolute interval, frequency.
struct TransformKey {
  SegmentKind kind = SegmentKind::fid;
  std::int32_t n_pulses = 0;
  std::int64_t t_start_q = 0;
  std::int64_t t_end_q = 0;
  std::uint64_t omega_bits = 0;

  static TransformKey from(const Segment& seg, double omega) {
    return {seg.kind, seg.n_pulses, quantize_time(seg.t_start), quantize_time(seg.t_end),
            std::bit_cast<std::uint64_t>(omega)};
  }

  double omega() const { return std::bit_cast<double>(omega_bits); }

  friend bool operator==(const TransformKey&, const TransformKey&) = default;
  friend auto operator<=>(const TransformKey&, const TransformKey&) = default;
};

struct TransformKeyHash {
  std::size_t operator()(const TransformKey& k) const noexcept {
    std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.kind) |
                               (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.n_pulses)) << 8));
    h = mix_seed(h ^ static_cast<std::uint64_t>(k.t_start_q));
    h = mix_seed(h ^ static_cast<std::uint64_t>(k.t_end_q));
    h = mix_seed(h ^ k.omega_bits);
    return static_cast<std::size_t>(h);
  }
};

namespace detail {

struct SpectrumKey {
  SegmentKind kind;
  std::int32_t n_pulses;
  std::int64_t t_start_q;
  std::int64_t t_end_q;
  std::uint64_t omega_min_bits;
  std::uint64_t omega_max_bits;
  std::uint64_t n_points;
  friend bool operator==(const SpectrumKey&, const SpectrumKey&) = default;
};

struct SpectrumKeyHash {
  std::size_t operator()(const SpectrumKey& k) const noexcept {
    std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.kind) |
                               (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.n_pulses)) << 8));
    h = mix_seed(h ^ static_cast<std::uint64_t>(k.t_start_q));
    h = mix_seed(h ^ static_cast<std::uint64_t>(k.t_end_q));
    h = mix_seed(h ^ k.omega_min_bits);
    h = mix_seed(h ^ k.omega_max_bits);
    return static_cast<std::size_t>(mix_seed(h ^ k.n_points));
  }
};

}  // namespace detail

using Spectrum = std::vector<Complex>;
using SpectrumPtr = std::shared_ptr<const Spectrum>;

/// Memo table of segment transforms Y_k(omega).
///
/// Entries are keyed per (segment, omega). Whole-grid lookups are served from
/// a derived per-segment view so the hot path costs one hash probe per
/// segment; the view is rebuilt from entries and never persisted. Reads take
/// a shared lock, inserts an exclusive one. Stored values are pure functions
/// of their keys, so results do not depend on which thread filled an entry.
class TransformCache {
 public:
  struct Stats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t entries = 0;
  };

  explicit TransformCache(QuadratureConfig quadrature = {}, bool enabled = true)
      : quadrature_(quadrature), enabled_(enabled) {}

  TransformCache(const TransformCache&) = delete;
  TransformCache& operator=(const TransformCache&) = delete;

  TransformCache(TransformCache&& other) noexcept
      : quadrature_(other.quadrature_),
        enabled_(other.enabled_),
        values_(std::move(other.values_)),
        spectra_(std::move(other.spectra_)),
        hits_(other.hits_.load()),
        misses_(other.misses_.load()) {}

  const QuadratureConfig& quadrature() const { return quadrature_; }
  bool enabled() const { return enabled_; }

  Complex value(const Segment& seg, double omega) {
    if (!enabled_) {
      misses_.fetch_add(1, std::memory_order_relaxed);
      return integrate_segment(seg, omega, quadrature_);
    }
    const auto key = TransformKey::from(seg, omega);
    {
      std::shared_lock lock(mutex_);
      if (auto it = values_.find(key); it != values_.end()) {
        hits_.fetch_add(1, std::memory_order_relaxed);
        return it->second;
      }
    }
    misses_.fetch_add(1, std::memory_order_relaxed);
    const Complex v = integrate_segment(seg, omega, quadrature_);
    std::unique_lock lock(mutex_);
    return values_.try_emplace(key, v).first->second;
  }

  /// Y_k at every grid point.
  SpectrumPtr spectrum(const Segment& seg, const FrequencyGrid& grid) {
    if (!enabled_) {
      misses_.fetch_add(grid.n_points, std::memory_order_relaxed);
      return std::make_shared<const Spectrum>(compute_spectrum(seg, grid));
    }
    const detail::SpectrumKey skey{seg.kind,
                                   seg.n_pulses,
                                   quantize_time(seg.t_start),
                                   quantize_time(seg.t_end),
                                   std::bit_cast<std::uint64_t>(grid.omega_min),
                                   std::bit_cast<std::uint64_t>(grid.omega_max),
                                   grid.n_points};
    Spectrum values(grid.n_points);
    std::vector<std::size_t> missing;
    {
      std::shared_lock lock(mutex_);
      if (auto it = spectra_.find(skey); it != spectra_.end()) {
        hits_.fetch_add(grid.n_points, std::memory_order_relaxed);
        return it->second;
      }
      for (std::size_t i = 0; i < grid.n_points; ++i) {
        auto it = values_.find(TransformKey::from(seg, grid.at(i)));
        if (it != values_.end()) {
          values[i] = it->second;
        } else {
          missing.push_back(i);
        }
      }
    }
    hits_.fetch_add(grid.n_points - missing.size(), std::memory_order_relaxed);
    misses_.fetch_add(missing.size(), std::memory_order_relaxed);
    for (std::size_t i : missing) values[i] = integrate_segment(seg, grid.at(i), quadrature_);

    std::unique_lock lock(mutex_);
    if (auto it = spectra_.find(skey); it != spectra_.end()) return it->second;
    for (std::size_t i : missing) values_.try_emplace(TransformKey::from(seg, grid.at(i)), values[i]);
    auto ptr = std::make_shared<const Spectrum>(std::move(values));
    spectra_.emplace(skey, ptr);
    return ptr;
  }

  Stats stats() const {
    std::shared_lock lock(mutex_);
    return {hits_.load(), misses_.load(), values_.size()};
  }

  void reset_counters() {
    hits_ = 0;
    misses_ = 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
  }

  bool contains(const TransformKey& key) const {
    std::shared_lock lock(mutex_);
    return values_.contains(key);
  }

  void insert(const TransformKey& key, Complex v) {
    std::unique_lock lock(mutex_);
    values_.insert_or_assign(key, v);
    spectra_.clear();
  }

  /// All entries in key order.
  std::vector<std::pair<TransformKey, Complex>> entries() const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<TransformKey, Complex>> out(values_.begin(), values_.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  void clear() {
    std::unique_lock lock(mutex_);
    values_.clear();
    spectra_.clear();
  }

 private:
  Spectrum compute_spectrum(const Segment& seg, const FrequencyGrid& grid) const {
    Spectrum out(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) out[i] = integrate_segment(seg, grid.at(i), quadrature_);
    return out;
  }

  QuadratureConfig quadrature_;
  bool enabled_ = true;
  mutable std::shared_mutex mutex_;
  std::unordered_map<TransformKey, Complex, TransformKeyHash> values_;
  std::unordered_map<detail::SpectrumKey, SpectrumPtr, detail::SpectrumKeyHash> spectra_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

inline Complex segment_fourier(const Segment& seg, double omega, TransformCache& cache) {
  if (!(omega > 0.0)) throw DomainError("segment_fourier: omega must be > 0");
  return cache.value(seg, omega);
}

/// Y(omega, T) as the parity-weighted sum of memoized segment transforms.
inline Complex sequence_fourier(const DdSequence& seq, double omega, TransformCache& cache) {
  if (!(omega > 0.0)) throw DomainError("sequence_fourier: omega must be > 0");
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Complex y = cache.value(seq.segments()[k], omega);
    acc += seq.entry_parity(k) > 0 ? y : -y;
  }
  return acc;
}

/// Running Y(omega, T) over a grid, extended one segment at a time.
///
/// Appending segments in order performs the same floating-point operations as
/// a from-scratch sum, so a copied prefix extended by a suffix is bit-identical
/// to evaluating the whole sequence.
class SpectrumAccumulator {
 public:
  explicit SpectrumAccumulator(const FrequencyGrid& grid) : grid_(grid), sum_(grid.n_points) {}

  void append(const Segment& seg, int parity, TransformCache& cache) {
    const auto spec = cache.spectrum(seg, grid_);
    const Complex* src = spec->data();
    Complex* dst = sum_.data();
    const std::size_t n = sum_.size();
    if (parity > 0) {
      for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) dst[i] -= src[i];
    }
  }

  void append_all(const DdSequence& seq, TransformCache& cache) {
    for (std::size_t k = 0; k < seq.size(); ++k) append(seq.segments()[k], seq.entry_parity(k), cache);
  }

  const Spectrum& values() const { return sum_; }
  const FrequencyGrid& grid() const { return grid_; }

 private:
  FrequencyGrid grid_;
  Spectrum sum_;
};

inline Spectrum sequence_spectrum(const DdSequence& seq, const FrequencyGrid& grid, TransformCache& cache) {
  grid.validate();
  SpectrumAccumulator acc(grid);
  acc.append_all(seq, cache);
  return acc.values();
}

/// F(omega, T) = |Y(omega, T)|^2 on the grid.
inline std::vector<double> filter_function(const DdSequence& seq, const FrequencyGrid& grid,
                                           TransformCache& cache) {
  const auto y = sequence_spectrum(seq, grid, cache);
  std::vector<double> f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) f[i] = std::norm(y[i]);
  return f;
}

// Cache file: fixed little-endian binary layout.
//   header: magic "DDTCACHE" | u32 version | u32 rule | u64 points_per_reference |
//           f64 reference_duration | u64 record_count
//   record: u8 kind | u8 pad[3] | i32 n_pulses | i64 t_start_q | i64 t_end_q |
//           f64 omega | f64 re | f64 im
namespace detail {

inline constexpr char kCacheMagic[8] = {'D', 'D', 'T', 'C', 'A', 'C', 'H', 'E'};
inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::size_t kRecordSize = 48;

static_assert(std::endian::native == std::endian::little, "cache format assumes little-endian host");

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace detail

inline void save_cache(const TransformCache& cache, const std::filesystem::path& path) {
  const auto entries = cache.entries();
  std::string buf;
  buf.reserve(40 + entries.size() * detail::kRecordSize);
  buf.append(detail::kCacheMagic, 8);
  detail::put<std::uint32_t>(buf, detail::kCacheVersion);
  detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(cache.quadrature().rule));
  detail::put<std::uint64_t>(buf, cache.quadrature().points_per_reference);
  detail::put<double>(buf, cache.quadrature().reference_duration);
  detail::put<std::uint64_t>(buf, entries.size());
  for (const auto& [key, v] : entries) {
    detail::put<std::uint8_t>(buf, static_cast<std::uint8_t>(key.kind));
    buf.append(3, '\0');
    detail::put<std::int32_t>(buf, key.n_pulses);
    detail::put<std::int64_t>(buf, key.t_start_q);
    detail::put<std::int64_t>(buf, key.t_end_q);
    detail::put<std::uint64_t>(buf, key.omega_bits);
    detail::put<double>(buf, v.real());
    detail::put<double>(buf, v.imag());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open cache file for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ParseError("failed writing cache file: " + path.string());
}

/// Reads a cache file. A missing file yields an empty cache only when
/// `create_if_absent` is set; `quadrature` then configures the new cache.
inline TransformCache load_cache(const std::filesystem::path& path, bool create_if_absent = false,
                                 const QuadratureConfig& quadrature = {}) {
  if (!std::filesystem::exists(path)) {
    if (create_if_absent) return TransformCache(quadrature);
    throw ParseError("cache file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open cache file: " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 8 + 4 + 4 + 8 + 8 + 8;
  if (buf.size() < kHeader || std::memcmp(buf.data(), detail::kCacheMagic, 8) != 0)
    throw ParseError("cache file " + path.string() + ": bad header");
  const char* p = buf.data() + 8;
  const auto version = detail::get<std::uint32_t>(p);
  if (version != detail::kCacheVersion)
    throw ParseError("cache file " + path.string() + ": unsupported version " + std::to_string(version));
  const auto rule = detail::get<std::uint32_t>(p + 4);
  if (rule > 1) throw ParseError("cache file " + path.string() + ": unknown quadrature rule");
  QuadratureConfig quad;
  quad.rule = static_cast<QuadratureRule>(rule);
  quad.points_per_reference = detail::get<std::uint64_t>(p + 8);
  quad.reference_duration = detail::get<double>(p + 16);
  const auto count = detail::get<std::uint64_t>(p + 24);

  TransformCache cache(quad);
  const char* rec = buf.data() + kHeader;
  const std::size_t available = buf.size() - kHeader;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string where = "cache file " + path.string() + ": record " + std::to_string(i);
    if ((i + 1) * detail::kRecordSize > available) throw ParseError(where + " truncated");
    const char* r = rec + i * detail::kRecordSize;
    const auto kind = detail::get<std::uint8_t>(r);
    if (kind > 3) throw ParseError(where + " has invalid segment kind " + std::to_string(kind));
    TransformKey key;
    key.kind = static_cast<SegmentKind>(kind);
    key.n_pulses = detail::get<std::int32_t>(r + 4);
    key.t_start_q = detail::get<std::int64_t>(r + 8);
    key.t_end_q = detail::get<std::int64_t>(r + 16);
    key.omega_bits = detail::get<std::uint64_t>(r + 24);
    const double re = detail::get<double>(r + 32);
    const double im = detail::get<double>(r + 40);
    if (key.n_pulses < 0 || key.t_end_q <= key.t_start_q || !(key.omega() > 0.0) ||
        !std::isfinite(re) || !std::isfinite(im)) {
      throw ParseError(where + " is corrupt");
    }
    cache.insert(key, Complex(re, im));
  }
  if (available != count * detail::kRecordSize)
    throw ParseError("cache file " + path.string() + ": trailing bytes after record " +
                     std::to_string(count));
  return cache;
}

}  // namespace ddtune
