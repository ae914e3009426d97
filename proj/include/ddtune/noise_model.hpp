#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ddtune/errors.hpp"
#include "ddtune/rng.hpp"

namespace ddtune {

/// Anything that maps an angular frequency (rad/us) to a spectral density.
template <typename T>
concept SpectralDensity = requires(const T& s, double omega) {
  { s(omega) } -> std::convertible_to<double>;
};

/// Constant floor plus one Gaussian peak; the spin-bath model.
///
/// Frequencies are angular, in rad/us. `source_b` records the field (gauss)
/// the peak center was derived from, when it was sampled that way.
struct GaussianNsd {
  double y0 = 0.0;
  double a = 0.0;
  double v_L = 1.0;
  double w1 = 1.0;
  std::optional<double> source_b;

  void validate() const {
    if (!(y0 >= 0.0)) throw DomainError("GaussianNsd: y0 must be >= 0");
    if (!(a >= 0.0)) throw DomainError("GaussianNsd: a must be >= 0");
    if (!(w1 > 0.0)) throw DomainError("GaussianNsd: w1 must be > 0");
    if (!(v_L > 0.0)) throw DomainError("GaussianNsd: v_L must be > 0");
  }

  double operator()(double omega) const {
    if (omega < 0.0) throw DomainError("GaussianNsd: omega must be >= 0");
    const double d = (omega - v_L) / w1;
    return y0 + a * std::exp(-0.5 * d * d);
  }

  GaussianNsd scaled(double factor) const {
    GaussianNsd s = *this;
    s.y0 *= factor;
    s.a *= factor;
    return s;
  }
};

/// White floor + Gaussian + 1/f; the neutral-atom model. Undefined at omega = 0.
struct ThreeComponentNsd {
  double y0 = 0.0;
  double a_g = 0.0;
  double v_g = 1.0;
  double w_g = 1.0;
  double a_1f = 0.0;

  void validate() const {
    if (!(y0 >= 0.0 && a_g >= 0.0 && a_1f >= 0.0))
      throw DomainError("ThreeComponentNsd: amplitudes must be >= 0");
    if (!(w_g > 0.0)) throw DomainError("ThreeComponentNsd: w_g must be > 0");
  }

  double operator()(double omega) const {
    if (!(omega > 0.0)) throw DomainError("ThreeComponentNsd: omega must be > 0");
    const double d = (omega - v_g) / w_g;
    return y0 + a_g * std::exp(-0.5 * d * d) + a_1f / omega;
  }
};

template <SpectralDensity Nsd>
double evaluate_nsd(const Nsd& nsd, double omega) {
  return nsd(omega);
}

/// Field-to-frequency conversion constant, MHz/G.
inline constexpr double kDefaultGyromagnetic = 1.0705e-3;

/// Angular Larmor frequency (rad/us) for a field in gauss.
///
/// gamma is a linear-frequency constant (MHz/G); the 2*pi factor turns it
/// into rad/us and can be disabled to treat gamma*B as already angular.
inline double larmor_from_field(double field_gauss, double gamma = kDefaultGyromagnetic,
                                bool include_two_pi = true) {
  if (!(field_gauss > 0.0)) throw DomainError("larmor_from_field: B must be > 0");
  if (!(gamma > 0.0)) throw DomainError("larmor_from_field: gamma must be > 0");
  const double f = gamma * field_gauss;
  return include_two_pi ? 2.0 * std::numbers::pi * f : f;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

struct SamplerRanges {
  Interval y0{0.002, 0.008};
  Interval a{0.3, 0.7};
  Interval field_gauss{520.0, 538.0};
  Interval w1{0.004, 0.009};
};

/// Draws Gaussian noise environments uniformly and independently per parameter.
struct EnvironmentSampler {
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  SamplerRanges ranges;
  double gamma = kDefaultGyromagnetic;
  bool include_two_pi = true;

  void validate() const {
    if (count < 1) throw ConfigError("sampler: count must be >= 1");
    if (!(gamma > 0.0)) throw ConfigError("sampler: gamma must be > 0");
    auto check = [](const Interval& r, const char* name) {
      if (!(r.lo <= r.hi)) throw ConfigError(std::string("sampler: range '") + name + "' has lo > hi");
    };
    check(ranges.y0, "y0");
    check(ranges.a, "a");
    check(ranges.field_gauss, "B");
    check(ranges.w1, "w1");
    if (!(ranges.field_gauss.lo > 0.0)) throw ConfigError("sampler: range 'B' must be positive");
    if (!(ranges.w1.lo > 0.0)) throw ConfigError("sampler: range 'w1' must be positive");
    if (!(ranges.y0.lo >= 0.0 && ranges.a.lo >= 0.0))
      throw ConfigError("sampler: amplitude ranges must be non-negative");
  }
};

/// Parameters are drawn in the order y0, a, B, w1 per environment from a
/// single mt19937_64 stream seeded with `sampler.seed`.
inline std::vector<GaussianNsd> sample_environments(const EnvironmentSampler& sampler) {
  sampler.validate();
  Rng rng(sampler.seed);
  std::vector<GaussianNsd> out;
  out.reserve(sampler.count);
  const auto& r = sampler.ranges;
  for (std::size_t i = 0; i < sampler.count; ++i) {
    GaussianNsd nsd;
    nsd.y0 = rng.uniform(r.y0.lo, r.y0.hi);
    nsd.a = rng.uniform(r.a.lo, r.a.hi);
    const double b = rng.uniform(r.field_gauss.lo, r.field_gauss.hi);
    nsd.w1 = rng.uniform(r.w1.lo, r.w1.hi);
    nsd.v_L = larmor_from_field(b, sampler.gamma, sampler.include_two_pi);
    nsd.source_b = b;
    out.push_back(nsd);
  }
  return out;
}

}  // namespace ddtune
