#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ddtune/errors.hpp"

namespace ddtune {

/// The four building blocks. Numeric codes are part of the file formats.
enum class SegmentKind : std::uint8_t { fid = 0, hahn = 1, cpmg = 2, udd = 3 };

inline constexpr std::size_t kNumSegmentKinds = 4;
inline constexpr std::array<SegmentKind, kNumSegmentKinds> kAllSegmentKinds = {
    SegmentKind::fid, SegmentKind::hahn, SegmentKind::cpmg, SegmentKind::udd};

inline constexpr double kDefaultSegmentDuration = 4.0;  // us
inline constexpr int kDefaultPulsesPerSegment = 4;

constexpr int to_code(SegmentKind kind) noexcept { return static_cast<int>(kind); }

inline SegmentKind kind_from_code(int code) {
  if (code < 0 || code > 3) throw DomainError("segment code out of range: " + std::to_string(code));
  return static_cast<SegmentKind>(code);
}

constexpr std::string_view to_string(SegmentKind kind) noexcept {
  switch (kind) {
    case SegmentKind::fid: return "FID";
    case SegmentKind::hahn: return "Hahn";
    case SegmentKind::cpmg: return "CPMG";
    case SegmentKind::udd: return "UDD";
  }
  return "?";
}

inline SegmentKind parse_segment_kind(std::string_view name) {
  for (auto kind : kAllSegmentKinds) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown segment kind '" + std::string(name) + "' (expected FID|Hahn|CPMG|UDD)");
}

/// Number of pi pulses a segment of this kind carries.
constexpr int pulse_count(SegmentKind kind, int pulses_per_segment) noexcept {
  switch (kind) {
    case SegmentKind::fid: return 0;
    case SegmentKind::hahn: return 1;
    case SegmentKind::cpmg:
    case SegmentKind::udd: return pulses_per_segment;
  }
  return 0;
}

struct Segment {
  SegmentKind kind = SegmentKind::fid;
  int n_pulses = 0;
  double t_start = 0.0;
  double t_end = kDefaultSegmentDuration;

  double duration() const { return t_end - t_start; }
};

inline Segment make_segment(SegmentKind kind, double t_start, double t_end,
                            int pulses_per_segment = kDefaultPulsesPerSegment) {
  if (!(t_end > t_start)) throw DomainError("segment must have positive duration");
  if (pulses_per_segment < 1 &&
      (kind == SegmentKind::cpmg || kind == SegmentKind::udd)) {
    throw DomainError("CPMG/UDD segments need at least one pulse");
  }
  return Segment{kind, pulse_count(kind, pulses_per_segment), t_start, t_end};
}

/// Absolute pi-pulse times inside the segment, strictly increasing and interior.
inline std::vector<double> pulse_times(const Segment& seg) {
  const double dt = seg.duration();
  const int n = seg.n_pulses;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n));
  switch (seg.kind) {
    case SegmentKind::fid:
      break;
    case SegmentKind::hahn:
      times.push_back(seg.t_start + 0.5 * dt);
      break;
    case SegmentKind::cpmg:
      for (int j = 1; j <= n; ++j) times.push_back(seg.t_start + (j - 0.5) * dt / n);
      break;
    case SegmentKind::udd:
      // Uhrig spacing: t_j = dt * sin^2(j*pi / (2n + 2)).
      for (int j = 1; j <= n; ++j) {
        const double s = std::sin(j * std::numbers::pi / (2.0 * n + 2.0));
        times.push_back(seg.t_start + dt * s * s);
      }
      break;
  }
  return times;
}

constexpr int segment_parity(const Segment& seg) noexcept { return seg.n_pulses % 2 == 0 ? 1 : -1; }

/// An ordered list of segment choices laid out back to back from t = 0.
class DdSequence {
 public:
  DdSequence() = default;

  explicit DdSequence(std::vector<SegmentKind> actions, double delta_t = kDefaultSegmentDuration,
                      int pulses_per_segment = kDefaultPulsesPerSegment)
      : actions_(std::move(actions)), delta_t_(delta_t), pulses_per_segment_(pulses_per_segment) {
    if (!(delta_t_ > 0.0)) throw DomainError("DdSequence: delta_t must be > 0");
    segments_.reserve(actions_.size());
    entry_parity_.reserve(actions_.size());
    int parity = 1;
    for (std::size_t k = 0; k < actions_.size(); ++k) {
      const double t0 = static_cast<double>(k) * delta_t_;
      const double t1 = static_cast<double>(k + 1) * delta_t_;
      segments_.push_back(make_segment(actions_[k], t0, t1, pulses_per_segment_));
      entry_parity_.push_back(parity);
      parity *= segment_parity(segments_.back());
    }
    exit_parity_ = parity;
  }

  /// Uniform repetition of one kind filling `n_segments` slots.
  static DdSequence uniform(SegmentKind kind, std::size_t n_segments,
                            double delta_t = kDefaultSegmentDuration,
                            int pulses_per_segment = kDefaultPulsesPerSegment) {
    return DdSequence(std::vector<SegmentKind>(n_segments, kind), delta_t, pulses_per_segment);
  }

  const std::vector<SegmentKind>& actions() const { return actions_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double delta_t() const { return delta_t_; }
  int pulses_per_segment() const { return pulses_per_segment_; }
  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  double total_time() const { return static_cast<double>(actions_.size()) * delta_t_; }

  /// Sign of y(t) at the start of segment k.
  int entry_parity(std::size_t k) const { return entry_parity_.at(k); }
  /// Sign of y(t) just after the last pulse.
  int exit_parity() const { return exit_parity_; }

  int total_pulses() const {
    int n = 0;
    for (const auto& s : segments_) n += s.n_pulses;
    return n;
  }

  /// y(t) in {+1, -1}. A pulse at exactly t has already flipped the sign.
  int modulation_value(double t) const {
    const double total = total_time();
    if (!(t >= 0.0 && t <= total)) throw DomainError("modulation_value: t outside [0, T]");
    if (segments_.empty()) return 1;
    auto k = static_cast<std::size_t>(std::floor(t / delta_t_));
    k = std::min(k, segments_.size() - 1);
    int sign = entry_parity_[k];
    for (double p : pulse_times(segments_[k])) {
      if (p <= t) sign = -sign;
    }
    return sign;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t k = 0; k < actions_.size(); ++k) {
      if (k) out += '|';
      out += ddtune::to_string(actions_[k]);
    }
    return out;
  }

  friend bool operator==(const DdSequence& a, const DdSequence& b) {
    return a.actions_ == b.actions_ && a.delta_t_ == b.delta_t_ &&
           a.pulses_per_segment_ == b.pulses_per_segment_;
  }

 private:
  std::vector<SegmentKind> actions_;
  double delta_t_ = kDefaultSegmentDuration;
  int pulses_per_segment_ = kDefaultPulsesPerSegment;
  std::vector<Segment> segments_;
  std::vector<int> entry_parity_;
  int exit_parity_ = 1;
};

/// Segment count for a total time, or ConfigError if T is not a positive multiple of delta_t.
inline std::size_t segments_for_time(double total_time, double delta_t) {
  if (!(total_time > 0.0) || !(delta_t > 0.0))
    throw ConfigError("total time and delta_t must be positive");
  const double ratio = total_time / delta_t;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("T = " + std::to_string(total_time) + " us is not a multiple of delta_t = " +
                      std::to_string(delta_t) + " us");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace ddtune
