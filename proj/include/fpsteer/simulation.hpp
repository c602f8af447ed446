#ifndef FPSTEER_SIMULATION_HPP
#define FPSTEER_SIMULATION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "fpsteer/controller.hpp"
#include "fpsteer/distribution.hpp"
#include "fpsteer/planner.hpp"
#include "fpsteer/realizer.hpp"

namespace fpsteer {

struct SimulationConfig {
  int runs = 2000;
  std::uint64_t seed = 20240501;
  bool record_full_trajectories = true;
  int threads = 0;  // 0: hardware concurrency; never changes results

  void validate() const;
};

/// Row r holds run r. states is empty unless full trajectories were recorded.
struct ClosedLoopResult {
  Eigen::VectorXd terminal;        // x(K)
  Eigen::MatrixXd states;          // runs x (K+1)
  Eigen::MatrixXd controls;        // u(k), runs x K
  Eigen::MatrixXd kernel_draws;    // F(k), runs x K

  int runs() const { return static_cast<int>(terminal.size()); }
  int horizon() const { return static_cast<int>(controls.cols()); }
};

/// x(0) ~ p0; per step F ~ kernels[k], w ~ N(0, s^2),
/// u = -c(k) a(k) x + F, x <- a(k) x + b(k) u + w. Streams are keyed by
/// (seed, run, step, role), so output is independent of threading.
ClosedLoopResult run_closed_loop(const LinearSystem& system, const DensitySpec& initial,
                                 const std::vector<StepControl>& controls,
                                 const std::vector<RealizedDensity>& kernels,
                                 const SimulationConfig& config);

Moments empirical_moments(std::span<const double> samples, Index order);

inline Moments empirical_moments(const Eigen::VectorXd& samples, Index order) {
  return empirical_moments(std::span<const double>(samples.data(), samples.size()), order);
}

/// Standard errors SD(x^l) / sqrt(M) of the empirical raw moments.
Eigen::VectorXd moment_standard_errors(std::span<const double> samples, Index order);

}  // namespace fpsteer

#endif  // FPSTEER_SIMULATION_HPP
