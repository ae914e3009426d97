#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "ddtune/noise_model.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

/// Per-grid-point weights w_i such that chi = sum_i w_i F(omega_i).
///
/// w_i = trapezoid_i * S(omega_i) / (pi * omega_i^2). Precomputing them once
/// per noise environment turns every later chi into a dot product.
class NoiseKernel {
 public:
  template <SpectralDensity Nsd>
  NoiseKernel(const Nsd& nsd, const FrequencyGrid& grid) : grid_(grid) {
    grid.validate();
    const auto trap = grid.trapezoid_weights();
    weights_.resize(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double w = grid.at(i);
      weights_[i] = trap[i] * nsd(w) / (std::numbers::pi * w * w);
    }
  }

  double chi(const Spectrum& y) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) sum += weights_[i] * std::norm(y[i]);
    return sum;
  }

  const std::vector<double>& weights() const { return weights_; }
  const FrequencyGrid& grid() const { return grid_; }

 private:
  FrequencyGrid grid_;
  std::vector<double> weights_;
};

struct CoherenceResult {
  double chi = 0.0;
  /// exp(-chi); underflows to 0 once chi exceeds ~745.
  double w = 1.0;
  FrequencyGrid grid;
  std::string sequence_id;
  std::string nsd_id;
};

template <SpectralDensity Nsd>
double decoherence_chi(const DdSequence& seq, const Nsd& nsd, const FrequencyGrid& grid,
                       TransformCache& cache) {
  const NoiseKernel kernel(nsd, grid);
  return kernel.chi(sequence_spectrum(seq, grid, cache));
}

template <SpectralDensity Nsd>
CoherenceResult coherence(const DdSequence& seq, const Nsd& nsd, const FrequencyGrid& grid,
                          TransformCache& cache, std::string sequence_id = {},
                          std::string nsd_id = {}) {
  CoherenceResult r;
  r.chi = decoherence_chi(seq, nsd, grid, cache);
  r.w = std::exp(-r.chi);
  r.grid = grid;
  r.sequence_id = sequence_id.empty() ? seq.to_string() : std::move(sequence_id);
  r.nsd_id = std::move(nsd_id);
  return r;
}

/// Fast repeated coherence evaluation against one fixed environment.
class CoherenceEvaluator {
 public:
  template <SpectralDensity Nsd>
  CoherenceEvaluator(const Nsd& nsd, const FrequencyGrid& grid, TransformCache& cache)
      : kernel_(nsd, grid), cache_(&cache) {}

  double coherence(const DdSequence& seq) const {
    SpectrumAccumulator acc(kernel_.grid());
    acc.append_all(seq, *cache_);
    return std::exp(-kernel_.chi(acc.values()));
  }

  double coherence(const SpectrumAccumulator& acc) const { return std::exp(-kernel_.chi(acc.values())); }

  const NoiseKernel& kernel() const { return kernel_; }
  TransformCache& cache() const { return *cache_; }
  const FrequencyGrid& grid() const { return kernel_.grid(); }

 private:
  NoiseKernel kernel_;
  TransformCache* cache_;
};

}  // namespace ddtune
