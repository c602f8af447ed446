#include "fpsteer/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fpsteer {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

struct Candidate {
  double c;
  double cost;
};

/// Smallest cost, preferring smaller c when costs agree to 1e-12 relative.
Candidate pick_best(std::vector<Candidate> candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& l, const Candidate& r) { return l.c < r.c; });
  Candidate best = candidates.front();
  for (const auto& cand : candidates)
    if (cand.cost < best.cost - 1e-12 * (1.0 + std::abs(best.cost))) best = cand;
  return best;
}

template <typename Cost>
double golden_section(Cost&& cost, double lo, double hi, double tol) {
  double x1 = hi - kInvGolden * (hi - lo);
  double x2 = lo + kInvGolden * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvGolden * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvGolden * (hi - lo);
      f2 = cost(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void ControllerConfig::validate() const {
  if (grid < 3) throw DomainError("controller grid resolution must be >= 3");
  if (!(c_tol > 0.0) || !(psd_tol > 0.0)) throw DomainError("controller tolerances must be positive");
}

InfeasibleStepError::InfeasibleStepError(StepFeasibilityReport report)
    : std::runtime_error("step " + std::to_string(report.step) +
                         " has no feasible gain c in [0, 1] (min eig H_F " +
                         std::to_string(report.witness.min_eig_kernel) + ", H_u " +
                         std::to_string(report.witness.min_eig_control) + ")"),
      report_(std::move(report)) {}

double control_objective(double c, const Moments& xk, const Moments& xk1, double a, double b,
                         const Moments& noise, CostVariant variant) {
  if (xk.order() < 2) throw DomainError("step cost needs moments up to order 2");
  const double a_tilde = a * (1.0 - b * c);
  const Moments input = recover_input_moments(xk, xk1, a_tilde);
  const Moments& mixed =
      variant == CostVariant::paper_cost ? input : deconvolve_moments(input, b, noise);
  return c * c * a * a * xk[2] - 2.0 * c * a * xk[1] * mixed[1] + mixed[2];
}

StepControl solve_step(const Moments& xk, const Moments& xk1, const LinearSystem& system, int step,
                       const ControllerConfig& config) {
  config.validate();
  StepFeasibilityReport report =
      check_step_reachable(xk, xk1, system, step, config.reachability());
  if (!report.feasible) throw InfeasibleStepError(std::move(report));

  const double a = system.a[step];
  const double b = system.b[step];
  const Moments noise = gaussian_noise_moments(system.noise_variance, xk.order());
  auto cost = [&](double c) { return control_objective(c, xk, xk1, a, b, noise, config.cost); };

  const double spacing = 1.0 / double(config.grid - 1);
  std::vector<Candidate> scanned;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < report.feasible_intervals.size(); ++i) {
    const auto [lo, hi] = report.feasible_intervals[i];
    scanned.push_back({lo, cost(lo)});
    owner.push_back(i);
    for (int g = 0; g < config.grid; ++g) {
      const double c = double(g) * spacing;
      if (c > lo && c < hi) {
        scanned.push_back({c, cost(c)});
        owner.push_back(i);
      }
    }
    if (hi > lo) {
      scanned.push_back({hi, cost(hi)});
      owner.push_back(i);
    }
  }
  const Candidate coarse = pick_best(scanned);
  std::size_t interval = 0;
  for (std::size_t i = 0; i < scanned.size(); ++i)
    if (scanned[i].c == coarse.c) interval = owner[i];

  const auto [lo, hi] = report.feasible_intervals[interval];
  const double left = std::max(lo, coarse.c - spacing);
  const double right = std::min(hi, coarse.c + spacing);

  std::vector<Candidate> finalists{coarse, {left, cost(left)}, {right, cost(right)}};
  if (right - left > config.c_tol) {
    const double c = golden_section(cost, left, right, config.c_tol);
    finalists.push_back({c, cost(c)});
  }

  // Probed feasibility holes inside a bracket are possible; fall back to the
  // next best finalist that is feasible. The coarse point always is.
  GainEvaluation chosen;
  while (true) {
    const Candidate best = pick_best(finalists);
    chosen = evaluate_gain(xk, xk1, system, step, best.c, config.psd_tol);
    if (chosen.feasible || best.c == coarse.c) break;
    std::erase_if(finalists, [&](const Candidate& f) { return f.c == best.c; });
  }

  StepControl control;
  control.step = step;
  control.c = chosen.c;
  control.a_tilde = chosen.a_tilde;
  control.input_moments = chosen.input_moments;
  control.kernel_moments = chosen.kernel_moments;
  control.control_moments = chosen.control_moments;
  control.objective = cost(chosen.c);
  return control;
}

}  // namespace fpsteer
