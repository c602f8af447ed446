#include "fpsteer/planner.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fpsteer {

namespace {

struct Spectrum {
  double min = 0.0;
  double margin = 0.0;  // min / (1 + max |lambda|)
};

Spectrum spectrum_of(const Moments& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hankel_from_moments(m).matrix(),
                                                        Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.minCoeff() / (1.0 + ev.cwiseAbs().maxCoeff())};
}

double margin_of(const GainEvaluation& g) {
  const auto f = spectrum_of(g.kernel_moments);
  const auto u = spectrum_of(g.control_moments);
  return std::min(f.margin, u.margin);
}

Moments inflate_even(const Moments& m, double delta) {
  Vector<double> v = m.values();
  for (Index l = 2; l <= m.order(); l += 2) v[l - 1] *= std::pow(1.0 + delta, 0.5 * double(l));
  return Moments(std::move(v));
}

}  // namespace

void LinearSystem::validate() const {
  if (a.empty()) throw DomainError("system horizon must be >= 1");
  if (a.size() != b.size()) throw DomainError("gain sequences a and b differ in length");
  for (std::size_t k = 0; k < b.size(); ++k)
    if (b[k] == 0.0 || !std::isfinite(b[k]) || !std::isfinite(a[k]))
      throw DomainError("gain b(" + std::to_string(k) + ") must be finite and nonzero");
  if (!(noise_variance > 0.0)) throw DomainError("noise variance must be positive");
}

MomentStateTrajectory interpolate_states(const Moments& x0, const Moments& xk, int horizon) {
  if (x0.order() != xk.order()) throw DomainError("endpoint moment orders differ");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  MomentStateTrajectory plan;
  plan.states.reserve(horizon + 1);
  plan.states.push_back(x0);
  for (int k = 1; k < horizon; ++k) {
    const double t = double(k) / double(horizon);
    plan.states.emplace_back(Vector<double>((1.0 - t) * x0.values() + t * xk.values()));
  }
  plan.states.push_back(xk);
  return plan;
}

GainEvaluation evaluate_gain(const Moments& xk, const Moments& xk1, const LinearSystem& system,
                             int step, double c, double psd_tol) {
  const double a = system.a.at(step);
  const double b = system.b.at(step);
  const Moments noise = gaussian_noise_moments(system.noise_variance, xk.order());

  GainEvaluation g;
  g.c = c;
  g.a_tilde = a * (1.0 - b * c);
  g.input_moments = recover_input_moments(xk, xk1, g.a_tilde);
  g.kernel_moments = deconvolve_moments(g.input_moments, b, noise);
  g.control_moments = moments_of_independent_sum(moments_of_scaled(xk, -c * a), g.kernel_moments);
  const auto hf = hankel_from_moments(g.kernel_moments);
  const auto hu = hankel_from_moments(g.control_moments);
  g.min_eig_kernel = min_eigenvalue(hf.matrix());
  g.min_eig_control = min_eigenvalue(hu.matrix());
  g.feasible = is_psd(hf, psd_tol) && is_psd(hu, psd_tol);
  return g;
}

StepFeasibilityReport check_step_reachable(const Moments& xk, const Moments& xk1,
                                           const LinearSystem& system, int step,
                                           const ReachabilityOptions& options) {
  if (step < 0 || step >= system.horizon())
    throw DomainError("step index " + std::to_string(step) + " outside [0, " +
                      std::to_string(system.horizon()) + ")");
  if (options.grid < 2) throw DomainError("c grid needs at least 2 points");

  auto probe = [&](double c) { return evaluate_gain(xk, xk1, system, step, c, options.psd_tol); };
  auto refine = [&](double infeasible, double feasible) {
    while (std::abs(feasible - infeasible) > options.c_tol) {
      const double mid = 0.5 * (infeasible + feasible);
      (probe(mid).feasible ? feasible : infeasible) = mid;
    }
    return feasible;
  };

  const int n = options.grid;
  std::vector<GainEvaluation> scan;
  scan.reserve(n);
  for (int i = 0; i < n; ++i) scan.push_back(probe(double(i) / double(n - 1)));

  StepFeasibilityReport report;
  report.step = step;
  for (int i = 0; i < n;) {
    if (!scan[i].feasible) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && scan[j + 1].feasible) ++j;
    const double lo = i > 0 ? refine(scan[i - 1].c, scan[i].c) : scan[i].c;
    const double hi = j + 1 < n ? refine(scan[j + 1].c, scan[j].c) : scan[j].c;
    report.feasible_intervals.emplace_back(lo, hi);
    i = j + 1;
  }

  report.feasible = !report.feasible_intervals.empty();
  if (report.feasible) {
    report.witness = probe(report.feasible_intervals.front().first);
  } else {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& g : scan) {
      const double m = margin_of(g);
      if (m > best) {
        best = m;
        report.witness = g;
      }
    }
  }
  return report;
}

std::vector<StepFeasibilityReport> check_plan(const MomentStateTrajectory& plan,
                                              const LinearSystem& system,
                                              const ReachabilityOptions& options) {
  if (plan.horizon() != system.horizon())
    throw DomainError("plan horizon does not match the system horizon");
  std::vector<StepFeasibilityReport> reports;
  reports.reserve(plan.horizon());
  for (int k = 0; k < plan.horizon(); ++k)
    reports.push_back(check_step_reachable(plan.states[k], plan.states[k + 1], system, k, options));
  return reports;
}

MomentStateTrajectory repair_plan(const MomentStateTrajectory& plan, const LinearSystem& system,
                                  int max_iters, const ReachabilityOptions& options) {
  if (plan.horizon() != system.horizon())
    throw DomainError("plan horizon does not match the system horizon");
  MomentStateTrajectory repaired = plan;
  const int horizon = plan.horizon();

  for (int k = 0; k + 1 < horizon; ++k) {
    double delta = 1e-3;
    int iter = 0;
    while (!check_step_reachable(repaired.states[k], repaired.states[k + 1], system, k, options)
                .feasible) {
      if (iter++ >= max_iters)
        throw PlanningError(k, "step " + std::to_string(k) + " still infeasible after " +
                                   std::to_string(max_iters) + " inflation rounds");
      repaired.states[k + 1] = inflate_even(plan.states[k + 1], delta);
      delta *= 2.0;
    }
  }

  const int last = horizon - 1;
  if (!check_step_reachable(repaired.states[last], repaired.states[horizon], system, last, options)
           .feasible)
    throw PlanningError(last, "step " + std::to_string(last) +
                                  " infeasible: the target moments are not reachable under the "
                                  "noise level (endpoint is fixed)");
  return repaired;
}

}  // namespace fpsteer
