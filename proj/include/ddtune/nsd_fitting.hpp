#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ddtune/coherence.hpp"
#include "ddtune/errors.hpp"
#include "ddtune/noise_model.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

/// Which pulse protocol produced a decay curve: "Ramsey" or "CPMG-<n>".
struct DecayLabel {
  enum class Kind { ramsey, cpmg };
  Kind kind = Kind::ramsey;
  int pulses = 0;

  static DecayLabel ramsey() { return {Kind::ramsey, 0}; }
  static DecayLabel cpmg(int n) { return {Kind::cpmg, n}; }

  static DecayLabel parse(std::string_view text) {
    if (text == "Ramsey") return ramsey();
    constexpr std::string_view prefix = "CPMG-";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string digits(text.substr(prefix.size()));
      if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const int n = std::stoi(digits);
        if (n >= 1) return cpmg(n);
      }
    }
    throw ParseError("unknown decay label '" + std::string(text) + "' (expected Ramsey or CPMG-<n>)");
  }

  std::string name() const { return kind == Kind::ramsey ? "Ramsey" : "CPMG-" + std::to_string(pulses); }

  friend bool operator==(const DecayLabel&, const DecayLabel&) = default;
};

/// Ramsey is one pulse-free interval; CPMG-n places n equidistant pulses over
/// the whole evolution window (not segmented).
inline DdSequence decay_sequence(const DecayLabel& label, double time) {
  if (label.kind == DecayLabel::Kind::ramsey) return DdSequence({SegmentKind::fid}, time, 1);
  return DdSequence({SegmentKind::cpmg}, time, label.pulses);
}

struct DecayPoint {
  double time = 0.0;
  double coherence = 0.0;
  double weight = 1.0;
};

struct DecayDataset {
  DecayLabel label;
  std::vector<DecayPoint> points;

  void validate() const {
    if (points.size() < 3) throw ConfigError("dataset " + label.name() + ": need at least 3 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!(p.time > 0.0)) throw ConfigError("dataset " + label.name() + ": times must be > 0");
      if (i > 0 && !(p.time > points[i - 1].time))
        throw ConfigError("dataset " + label.name() + ": times must be strictly increasing");
      if (!(p.coherence >= 0.0 && p.coherence <= 1.0))
        throw ConfigError("dataset " + label.name() + ": coherence must lie in [0, 1]");
      if (!(p.weight >= 0.0)) throw ConfigError("dataset " + label.name() + ": weights must be >= 0");
    }
  }

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& p : points) t.push_back(p.time);
    return t;
  }
};

inline std::vector<double> predict_decay(const ThreeComponentNsd& params, const DecayLabel& label,
                                         const std::vector<double>& times, const FrequencyGrid& grid,
                                         TransformCache& cache) {
  params.validate();
  const NoiseKernel kernel(params, grid);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    out.push_back(std::exp(-kernel.chi(sequence_spectrum(decay_sequence(label, t), grid, cache))));
  }
  return out;
}

struct FitBounds {
  ThreeComponentNsd lower;
  ThreeComponentNsd upper;

  /// Each parameter in [0, 10 x init]; w_g keeps a small positive floor.
  static FitBounds around(const ThreeComponentNsd& init) {
    FitBounds b;
    b.lower = {0.0, 0.0, 0.0, 1e-3 * init.w_g, 0.0};
    b.upper = {10.0 * init.y0, 10.0 * init.a_g, 10.0 * init.v_g, 10.0 * init.w_g, 10.0 * init.a_1f};
    return b;
  }
};

struct FitConfig {
  std::size_t grid_points_per_param = 3;
  std::size_t refine_starts = 8;
  std::size_t max_evaluations = 20000;
  std::size_t max_restarts = 6;
  double tolerance = 1e-13;
};

struct FitResult {
  ThreeComponentNsd params;
  double sse = 0.0;
  double initial_sse = 0.0;
  /// predicted - measured, per dataset and point.
  std::vector<std::vector<double>> residuals;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  /// SSE at every coarse-grid start, in enumeration order.
  std::vector<double> grid_sse;
};

namespace detail {

inline constexpr std::size_t kFitDims = 5;
using FitVector = std::array<double, kFitDims>;

inline ThreeComponentNsd nsd_from(const FitVector& x) { return {x[0], x[1], x[2], x[3], x[4]}; }
inline FitVector vector_from(const ThreeComponentNsd& p) { return {p.y0, p.a_g, p.v_g, p.w_g, p.a_1f}; }

/// chi decomposed by NSD component so parameter changes never touch the
/// spectral engine: chi = y0 A0 + a_1f A1 + a_g sum_i G_i exp(...).
class DecayModel {
 public:
  DecayModel(const std::vector<DecayDataset>& datasets, const FrequencyGrid& grid, TransformCache& cache)
      : grid_(grid), omegas_(grid.points()) {
    const auto trap = grid.trapezoid_weights();
    for (const auto& ds : datasets) {
      for (const auto& p : ds.points) {
        const auto f = filter_function(decay_sequence(ds.label, p.time), grid, cache);
        Point pt;
        pt.measured = p.coherence;
        pt.weight = p.weight;
        pt.gauss.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
          const double w = omegas_[i];
          const double g = trap[i] * f[i] / (std::numbers::pi * w * w);
          pt.gauss[i] = g;
          pt.white += g;
          pt.flicker += g / w;
        }
        points_.push_back(std::move(pt));
      }
    }
  }

  double sse(const FitVector& x) const {
    const double y0 = x[0], a_g = x[1], v_g = x[2], w_g = x[3], a_1f = x[4];
    const double h = grid_.spacing();
    const double reach = 12.0 * w_g;
    const auto lo_idx = static_cast<std::ptrdiff_t>(std::floor((v_g - reach - grid_.omega_min) / h));
    const auto hi_idx = static_cast<std::ptrdiff_t>(std::ceil((v_g + reach - grid_.omega_min) / h));
    const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, lo_idx));
    const std::size_t hi = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(hi_idx + 1, 0, static_cast<std::ptrdiff_t>(omegas_.size())));
    gauss_cache_.assign(omegas_.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = (omegas_[i] - v_g) / w_g;
      gauss_cache_[i] = std::exp(-0.5 * d * d);
    }
    double total = 0.0;
    for (const auto& pt : points_) {
      double g = 0.0;
      for (std::size_t i = lo; i < hi; ++i) g += pt.gauss[i] * gauss_cache_[i];
      const double chi = y0 * pt.white + a_1f * pt.flicker + a_g * g;
      const double r = std::exp(-chi) - pt.measured;
      total += pt.weight * r * r;
    }
    return total;
  }

 private:
  struct Point {
    double measured = 0.0;
    double weight = 1.0;
    double white = 0.0;
    double flicker = 0.0;
    std::vector<double> gauss;
  };

  FrequencyGrid grid_;
  std::vector<double> omegas_;
  std::vector<Point> points_;
  mutable std::vector<double> gauss_cache_;
};

/// Nelder-Mead on the unit box; trial points are clamped into [0, 1].
template <typename F>
std::pair<FitVector, double> nelder_mead(const F& f, FitVector start, double step, std::size_t max_evals,
                                         double tol, std::size_t& evals, bool& converged) {
  constexpr std::size_t n = kFitDims;
  auto clamp01 = [](FitVector v) {
    for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
    return v;
  };
  std::array<FitVector, n + 1> pts;
  std::array<double, n + 1> vals;
  pts[0] = clamp01(start);
  for (std::size_t i = 0; i < n; ++i) {
    FitVector p = pts[0];
    p[i] += (p[i] + step <= 1.0) ? step : -step;
    pts[i + 1] = clamp01(p);
  }
  for (std::size_t i = 0; i <= n; ++i) {
    vals[i] = f(pts[i]);
    ++evals;
  }
  std::size_t used = n + 1;
  converged = false;
  std::array<std::size_t, n + 1> order;
  while (used < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(pts[i][d] - pts[best][d]));
    if (vals[worst] - vals[best] <= tol * (std::abs(vals[best]) + 1e-300) + 1e-300 || size < 1e-12) {
      converged = true;
      break;
    }
    FitVector centroid{};
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / static_cast<double>(n);
    }
    auto along = [&](double coef) {
      FitVector p;
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      return clamp01(p);
    };
    auto eval = [&](const FitVector& p) {
      ++evals;
      ++used;
      return f(p);
    };
    const FitVector xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const FitVector xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const FitVector xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  return {pts[best], vals[best]};
}

}  // namespace detail

/// Joint least-squares fit of a three-component NSD to several decay curves.
///
/// Every point of a coarse grid over the bounds is scored; the best
/// `refine_starts` of them (plus the initial guess) seed restarted
/// Nelder-Mead searches in bound-normalized coordinates. The lowest final SSE
/// wins, ties going to the earliest start.
inline FitResult fit_nsd(const std::vector<DecayDataset>& datasets, const FitBounds& bounds,
                         const ThreeComponentNsd& init, const FrequencyGrid& grid, TransformCache& cache,
                         const FitConfig& config = {}) {
  if (datasets.size() < 2) throw ConfigError("fit_nsd: a joint fit needs at least 2 datasets");
  for (const auto& ds : datasets) ds.validate();
  for (std::size_t i = 0; i < datasets.size(); ++i)
    for (std::size_t j = i + 1; j < datasets.size(); ++j)
      if (datasets[i].label == datasets[j].label)
        throw ConfigError("fit_nsd: datasets need distinct labels (" + datasets[i].label.name() + " repeated)");
  grid.validate();
  const auto lo = detail::vector_from(bounds.lower);
  const auto hi = detail::vector_from(bounds.upper);
  for (std::size_t d = 0; d < detail::kFitDims; ++d)
    if (!(lo[d] <= hi[d])) throw ConfigError("fit_nsd: lower bound exceeds upper bound");
  if (!(hi[3] > 0.0)) throw ConfigError("fit_nsd: w_g upper bound must be > 0");

  const detail::DecayModel model(datasets, grid, cache);
  auto to_params = [&](const detail::FitVector& u) {
    detail::FitVector x;
    for (std::size_t d = 0; d < detail::kFitDims; ++d) x[d] = lo[d] + u[d] * (hi[d] - lo[d]);
    x[3] = std::max(x[3], std::max(lo[3], 1e-12));
    return x;
  };
  auto objective = [&](const detail::FitVector& u) { return model.sse(to_params(u)); };
  auto to_unit = [&](const detail::FitVector& x) {
    detail::FitVector u;
    for (std::size_t d = 0; d < detail::kFitDims; ++d)
      u[d] = hi[d] > lo[d] ? std::clamp((x[d] - lo[d]) / (hi[d] - lo[d]), 0.0, 1.0) : 0.0;
    return u;
  };

  FitResult result;
  const auto init_unit = to_unit(detail::vector_from(init));
  result.initial_sse = objective(init_unit);

  const std::size_t g = std::max<std::size_t>(config.grid_points_per_param, 1);
  std::size_t total = 1;
  for (std::size_t d = 0; d < detail::kFitDims; ++d) total *= g;
  std::vector<std::pair<double, detail::FitVector>> starts;
  starts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    detail::FitVector u;
    std::size_t rest = idx;
    for (std::size_t d = detail::kFitDims; d-- > 0;) {
      u[d] = g == 1 ? 0.5 : static_cast<double>(rest % g) / static_cast<double>(g - 1);
      rest /= g;
    }
    const double s = objective(u);
    result.grid_sse.push_back(s);
    starts.emplace_back(s, u);
  }
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  starts.resize(std::min(starts.size(), config.refine_starts));
  starts.insert(starts.begin(), {result.initial_sse, init_unit});

  double best_sse = std::numeric_limits<double>::infinity();
  detail::FitVector best_u = init_unit;
  bool best_converged = false;
  for (const auto& [s0, u0] : starts) {
    detail::FitVector u = u0;
    double f = s0;
    bool conv = false;
    for (std::size_t r = 0; r < config.max_restarts; ++r) {
      std::size_t evals = 0;
      auto [u_new, f_new] = detail::nelder_mead(objective, u, r == 0 ? 0.1 : 0.02, config.max_evaluations,
                                                config.tolerance, evals, conv);
      result.evaluations += evals;
      ++result.iterations;
      const bool improved = f_new < f * (1.0 - 1e-10);
      if (f_new <= f) {
        u = u_new;
        f = f_new;
      }
      if (!improved) break;
    }
    if (f < best_sse) {
      best_sse = f;
      best_u = u;
      best_converged = conv;
    }
  }

  result.params = detail::nsd_from(to_params(best_u));
  result.residuals.reserve(datasets.size());
  result.sse = 0.0;
  for (const auto& ds : datasets) {
    const auto pred = predict_decay(result.params, ds.label, ds.times(), grid, cache);
    std::vector<double> res(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      res[i] = pred[i] - ds.points[i].coherence;
      result.sse += ds.points[i].weight * res[i] * res[i];
    }
    result.residuals.push_back(std::move(res));
  }
  result.converged = best_converged && (best_sse < result.initial_sse || best_sse <= 1e-14);
  return result;
}

}  // namespace ddtune
