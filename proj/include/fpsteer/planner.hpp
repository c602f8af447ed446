#ifndef FPSTEER_PLANNER_HPP
#define FPSTEER_PLANNER_HPP

// Moment-space state trajectories for x(k+1) = a(k) x(k) + b(k) u(k) + w(k)
// under u(k) = -c(k) a(k) x(k) + F(k), and the per-step reachability test.

#include <optional>
#include <utility>
#include <vector>

#include "fpsteer/moment_algebra.hpp"

namespace fpsteer {

/// Known scalar gains and additive Gaussian noise level.
struct LinearSystem {
  std::vector<double> a;
  std::vector<double> b;
  double noise_variance = 1.0;

  int horizon() const { return static_cast<int>(a.size()); }
  /// Throws DomainError unless a and b have equal nonzero length, b(k) != 0, variance > 0.
  void validate() const;
};

struct MomentStateTrajectory {
  std::vector<Moments> states;  // X(0) .. X(K)

  int horizon() const { return static_cast<int>(states.size()) - 1; }
  Index order() const { return states.front().order(); }
};

/// X(k) = ((K-k)/K) X0 + (k/K) XK, with both endpoints copied exactly.
MomentStateTrajectory interpolate_states(const Moments& x0, const Moments& xk, int horizon);

/// Moments of a_tilde x + u for independent x and u.
template <typename Scalar>
MomentSequence<Scalar> propagate_moments(const MomentSequence<Scalar>& xk, Scalar a_tilde,
                                         const MomentSequence<Scalar>& u) {
  return moments_of_independent_sum(moments_of_scaled(xk, a_tilde), u);
}

/// The unique U with propagate_moments(xk, a_tilde, U) == xk1.
template <typename Scalar>
MomentSequence<Scalar> recover_input_moments(const MomentSequence<Scalar>& xk,
                                             const MomentSequence<Scalar>& xk1, Scalar a_tilde) {
  if (xk.order() != xk1.order()) throw DomainError("moment order mismatch in input recovery");
  return deconvolve_moments(xk1, Scalar(1), moments_of_scaled(xk, a_tilde));
}

/// Lower-triangular system matrix A(U) of the moment dynamics
/// X(k+1) = A(U) X(k) + U, entry (l-1, i-1) = C(l, i) a_tilde^i E[u^{l-i}].
template <typename Scalar>
Matrix<Scalar> propagation_matrix(Scalar a_tilde, const MomentSequence<Scalar>& u) {
  const Index order = u.order();
  Matrix<Scalar> a = Matrix<Scalar>::Zero(order, order);
  for (Index l = 1; l <= order; ++l) {
    const Vector<Scalar> c = binomial_row<Scalar>(l);
    Scalar power = Scalar(1);
    for (Index i = 1; i <= l; ++i) {
      power *= a_tilde;
      a(l - 1, i - 1) = c[i] * power * u[l - i];
    }
  }
  return a;
}

/// Everything implied by one choice of the feedback gain c at step k.
struct GainEvaluation {
  double c = 0.0;
  double a_tilde = 0.0;
  Moments input_moments;   // U(k), moments of b F + w
  Moments kernel_moments;  // F(k)
  Moments control_moments; // u(k) = -c a x + F
  double min_eig_kernel = 0.0;
  double min_eig_control = 0.0;
  bool feasible = false;
};

GainEvaluation evaluate_gain(const Moments& xk, const Moments& xk1, const LinearSystem& system,
                             int step, double c, double psd_tol = 1e-9);

struct StepFeasibilityReport {
  int step = 0;
  bool feasible = false;
  /// Closed feasible sub-intervals of [0, 1], boundaries refined to c_tol.
  std::vector<std::pair<double, double>> feasible_intervals;
  /// Evaluation at the smallest feasible c when feasible, otherwise at the
  /// probed c with the largest PSD margin.
  GainEvaluation witness;
};

struct ReachabilityOptions {
  int grid = 201;
  double psd_tol = 1e-9;
  double c_tol = 1e-6;
};

StepFeasibilityReport check_step_reachable(const Moments& xk, const Moments& xk1,
                                           const LinearSystem& system, int step,
                                           const ReachabilityOptions& options = {});

std::vector<StepFeasibilityReport> check_plan(const MomentStateTrajectory& plan,
                                              const LinearSystem& system,
                                              const ReachabilityOptions& options = {});

inline bool plan_feasible(const std::vector<StepFeasibilityReport>& reports) {
  for (const auto& r : reports)
    if (!r.feasible) return false;
  return true;
}

/// Inflates even moments of infeasible interior states, m_l -> (1+d)^{l/2} m_l,
/// with d doubling from 1e-3, until every step passes. Endpoints are never
/// touched; throws PlanningError naming the first step that cannot be fixed.
MomentStateTrajectory repair_plan(const MomentStateTrajectory& plan, const LinearSystem& system,
                                  int max_iters = 40, const ReachabilityOptions& options = {});

}  // namespace fpsteer

#endif  // FPSTEER_PLANNER_HPP
