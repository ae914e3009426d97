#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ddtune/noise_model.hpp"
#include "ddtune/oracle.hpp"
#include "ddtune/rl_agent.hpp"
#include "ddtune/spectral_engine.hpp"

namespace ddtune {

/// Runs fn(i) for i in [0, n) on `workers` threads. The first exception is
/// rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Ladder training for every environment; environment i uses seed base + i.
/// Output order follows the environment list regardless of `workers`.
template <SpectralDensity Nsd>
std::vector<std::vector<TrainResult>> train_environments(const std::vector<Nsd>& environments,
                                                         const TrainConfig& config, double max_time,
                                                         TransformCache& cache, std::size_t workers = 1) {
  std::vector<std::vector<TrainResult>> out(environments.size());
  parallel_for(environments.size(), workers, [&](std::size_t i) {
    TrainConfig c = config;
    c.seed = config.seed + i;
    out[i] = train_ladder(c, environments[i], max_time, cache);
  });
  return out;
}

template <SpectralDensity Nsd>
std::vector<OracleResult> oracle_environments(const std::vector<Nsd>& environments, std::size_t n_segments,
                                              OracleMode mode, TransformCache& cache, const OracleConfig& config,
                                              std::size_t workers = 1) {
  std::vector<OracleResult> out(environments.size());
  parallel_for(environments.size(), workers, [&](std::size_t i) {
    out[i] = mode == OracleMode::exhaustive ? oracle_exhaustive(environments[i], n_segments, cache, config)
                                            : oracle_incremental(environments[i], n_segments, cache, config);
  });
  return out;
}

}  // namespace ddtune
