#ifndef FPSTEER_CONTROLLER_HPP
#define FPSTEER_CONTROLLER_HPP

#include <stdexcept>

#include "fpsteer/planner.hpp"

namespace fpsteer {

/// paper_cost: E[(-c a x + u~)^2]; physical_cost: E[(-c a x + F)^2] = E[u^2].
enum class CostVariant { paper_cost, physical_cost };

struct ControllerConfig {
  int grid = 201;
  double c_tol = 1e-6;
  double psd_tol = 1e-9;
  CostVariant cost = CostVariant::paper_cost;

  void validate() const;
  ReachabilityOptions reachability() const { return {grid, psd_tol, c_tol}; }
};

struct StepControl {
  int step = 0;
  double c = 0.0;
  double a_tilde = 0.0;
  Moments input_moments;    // U(k)
  Moments kernel_moments;   // F(k)
  Moments control_moments;  // u(k)
  double objective = 0.0;
};

/// Raised by solve_step when no probed gain is feasible.
class InfeasibleStepError : public std::runtime_error {
 public:
  explicit InfeasibleStepError(StepFeasibilityReport report);
  const StepFeasibilityReport& report() const noexcept { return report_; }

 private:
  StepFeasibilityReport report_;
};

/// Quadratic step cost J(c). noise supplies the moments of w(k).
double control_objective(double c, const Moments& xk, const Moments& xk1, double a, double b,
                         const Moments& noise, CostVariant variant = CostVariant::paper_cost);

/// Minimizes J over the feasible part of [0, 1]: grid scan, golden-section
/// refinement inside the best feasible bracket, ties resolved toward smaller c.
StepControl solve_step(const Moments& xk, const Moments& xk1, const LinearSystem& system, int step,
                       const ControllerConfig& config = {});

}  // namespace fpsteer

#endif  // FPSTEER_CONTROLLER_HPP
