#include "fpsteer/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "fpsteer/random.hpp"

namespace fpsteer {

void SimulationConfig::validate() const {
  if (runs < 1) throw DomainError("simulation needs at least one run");
  if (threads < 0) throw DomainError("thread count must be non-negative");
}

ClosedLoopResult run_closed_loop(const LinearSystem& system, const DensitySpec& initial,
                                 const std::vector<StepControl>& controls,
                                 const std::vector<RealizedDensity>& kernels,
                                 const SimulationConfig& config) {
  config.validate();
  system.validate();
  const int horizon = system.horizon();
  if (static_cast<int>(controls.size()) != horizon || static_cast<int>(kernels.size()) != horizon)
    throw DomainError("need one control and one kernel per step: horizon " +
                      std::to_string(horizon) + ", got " + std::to_string(controls.size()) +
                      " controls and " + std::to_string(kernels.size()) + " kernels");

  const int runs = config.runs;
  ClosedLoopResult result;
  result.terminal.resize(runs);
  result.controls.resize(runs, horizon);
  result.kernel_draws.resize(runs, horizon);
  if (config.record_full_trajectories) result.states.resize(runs, horizon + 1);
  const double noise_sd = std::sqrt(system.noise_variance);

  auto simulate = [&](int run) {
    auto init_stream = substream(config.seed, run, 0, StreamRole::init);
    double x = sample(initial, init_stream);
    if (config.record_full_trajectories) result.states(run, 0) = x;
    for (int k = 0; k < horizon; ++k) {
      auto kernel_stream = substream(config.seed, run, k, StreamRole::kernel);
      auto noise_stream = substream(config.seed, run, k, StreamRole::noise);
      const double f = sample_realized(kernels[k], kernel_stream);
      const double w = std::normal_distribution<double>(0.0, noise_sd)(noise_stream);
      const double a = system.a[k];
      const double u = -controls[k].c * a * x + f;
      x = a * x + system.b[k] * u + w;
      result.kernel_draws(run, k) = f;
      result.controls(run, k) = u;
      if (config.record_full_trajectories) result.states(run, k + 1) = x;
    }
    result.terminal[run] = x;
  };

  const int workers = std::clamp(
      config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency()),
      1, runs);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int run = t; run < runs; run += workers) simulate(run);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

Moments empirical_moments(std::span<const double> samples, Index order) {
  if (samples.empty()) throw DomainError("empirical moments of an empty sample");
  Vector<double> sums = Vector<double>::Zero(order);
  for (double x : samples) {
    double power = 1.0;
    for (Index l = 0; l < order; ++l) {
      power *= x;
      sums[l] += power;
    }
  }
  return Moments(Vector<double>(sums / double(samples.size())));
}

Eigen::VectorXd moment_standard_errors(std::span<const double> samples, Index order) {
  if (samples.size() < 2) throw DomainError("standard errors need at least two samples");
  const Moments first = empirical_moments(samples, order);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(order);
  for (double x : samples) {
    double power = 1.0;
    for (Index l = 0; l < order; ++l) {
      power *= x;
      const double d = power - first[l + 1];
      sq[l] += d * d;
    }
  }
  const double m = double(samples.size());
  return (sq / (m - 1.0)).cwiseSqrt() / std::sqrt(m);
}

}  // namespace fpsteer
