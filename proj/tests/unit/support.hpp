#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ddtune/ddtune.hpp"

namespace testing_support {

using ddtune::Complex;
using ddtune::DdSequence;
using ddtune::SegmentKind;

inline double fid_filter(double omega, double t) {
  const double s = std::sin(0.5 * omega * t);
  return 4.0 * s * s / (omega * omega);
}

inline double hahn_filter(double omega, double t) {
  const double s = std::sin(0.25 * omega * t);
  return 16.0 * s * s * s * s / (omega * omega);
}

/// Exact integral of exp(-i w t) over [a, b].
inline Complex exact_piece(double omega, double a, double b) {
  const Complex i(0.0, 1.0);
  return (std::exp(-i * omega * a) - std::exp(-i * omega * b)) / (i * omega);
}

/// Whole-interval transform of y(t): every pulse in the sequence becomes a
/// breakpoint of one global piecewise integral, sign read from modulation_value.
inline Complex whole_interval_transform(const DdSequence& seq, double omega) {
  std::vector<double> breaks{0.0};
  for (const auto& seg : seq.segments())
    for (double p : ddtune::pulse_times(seg)) breaks.push_back(p);
  breaks.push_back(seq.total_time());
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    sum += static_cast<double>(seq.modulation_value(mid)) * exact_piece(omega, breaks[i], breaks[i + 1]);
  }
  return sum;
}

/// Seeded generator of random action lists.
class SequenceGen {
 public:
  explicit SequenceGen(std::uint64_t seed) : eng_(seed) {}

  std::vector<SegmentKind> actions(std::size_t n) {
    std::uniform_int_distribution<int> code(0, 3);
    std::vector<SegmentKind> out(n);
    for (auto& a : out) a = ddtune::kind_from_code(code(eng_));
    return out;
  }

  DdSequence sequence(std::size_t max_n) {
    std::uniform_int_distribution<std::size_t> len(1, max_n);
    return DdSequence(actions(len(eng_)));
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline ddtune::GaussianNsd default_env() { return {0.005, 0.5, 3.5, 0.006, std::nullopt}; }

inline ddtune::FrequencyGrid coarse_grid() { return {0.001, 8.5, 800}; }

}  // namespace testing_support
