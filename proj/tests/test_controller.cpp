#include <doctest.h>

#include <random>

#include "fpsteer/controller.hpp"
#include "fpsteer/distribution.hpp"
#include "oracles.hpp"

using namespace fpsteer;
using doctest::Approx;

namespace {

const Moments kStdNormal{0, 1, 0, 3};
const Moments kExample1Target{0.8, 8, 12.8, 160};
const Moments kUnitNoise = gaussian_noise_moments(1.0, 4);

LinearSystem example_system() { return {std::vector<double>(4, 0.5), std::vector<double>(4, 0.8), 1.0}; }

// J(c) written out from the second-order recursion, without the library's
// triangular solve: U1 = Y1 - t X1, U2 = Y2 - t^2 X2 - 2 t X1 U1.
double cost_by_hand(double c, double a, double b, const Moments& x, const Moments& y) {
  const double t = a * (1.0 - b * c);
  const double u1 = y[1] - t * x[1];
  const double u2 = y[2] - t * t * x[2] - 2.0 * t * x[1] * u1;
  return c * c * a * a * x[2] - 2.0 * c * a * x[1] * u1 + u2;
}

void check_zero_gain_plan(const Moments& target) {
  const auto plan = interpolate_states(kStdNormal, target, 4);
  for (int k = 0; k < 4; ++k) {
    const StepControl s = solve_step(plan.states[k], plan.states[k + 1], example_system(), k);
    CHECK(s.c == 0.0);
    CHECK(s.a_tilde == 0.5);
  }
}

}  // namespace

TEST_CASE("step cost") {
  const Moments xk1{0.2, 2.75, 3.2, 42.25};
  CHECK(control_objective(0.0, kStdNormal, xk1, 0.5, 0.8, kUnitNoise) == Approx(2.5).epsilon(1e-14));
  CHECK(control_objective(1.0, kStdNormal, xk1, 0.5, 0.8, kUnitNoise) == Approx(2.99).epsilon(1e-14));

  SUBCASE("point mass state leaves only the input second moment") {
    const Moments zero = Moments::zeros(4);
    for (double c : {0.0, 0.3, 1.0}) {
      const Moments u = recover_input_moments(zero, xk1, 0.5 * (1.0 - 0.8 * c));
      CHECK(control_objective(c, zero, xk1, 0.5, 0.8, kUnitNoise) == Approx(u[2]));
    }
  }
  SUBCASE("agrees with the hand expansion") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0), gain(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Moments x = Moments::from_std(oracle::random_atoms(rng, 4).moments(4));
      const Moments y = Moments::from_std(oracle::random_atoms(rng, 4).moments(4));
      const double c = unit(rng), a = gain(rng), b = gain(rng);
      CHECK(control_objective(c, x, y, a, b, kUnitNoise) ==
            Approx(cost_by_hand(c, a, b, x, y)).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("physical cost uses the kernel moments") {
    const double c = 0.4, at = 0.5 * (1.0 - 0.8 * c);
    const Moments f = deconvolve_moments(recover_input_moments(kStdNormal, xk1, at), 0.8, kUnitNoise);
    CHECK(control_objective(c, kStdNormal, xk1, 0.5, 0.8, kUnitNoise, CostVariant::physical_cost) ==
          Approx(c * c * 0.25 - 2.0 * c * 0.5 * 0.0 * f[1] + f[2]));
  }
}

TEST_CASE("optimal gain on the paper examples is zero") {
  SUBCASE("gaussian mixture target") { check_zero_gain_plan(kExample1Target); }
  SUBCASE("logistic mixture target") {
    const GeneralizedLogisticMixture tau{{0.4, 0.6}, {2.0, 3.0}, {0.0, -2.0}};
    check_zero_gain_plan(moments_of(tau, 4, MomentMethod::quadrature));
  }
}

TEST_CASE("interior optimum") {
  // a = 1, b = 0.5: J is a strictly convex quadratic with vertex inside [0, 1]
  const LinearSystem sys{{1.0}, {0.5}, 1.0};
  const Moments xk = moments_of(Gaussian{2.0, 0.25}, 4);
  const Moments xk1 = moments_of(Gaussian{3.0, 20.0}, 4);
  auto j = [&](double c) { return cost_by_hand(c, 1.0, 0.5, xk, xk1); };
  const double curv = 2.0 * (j(1.0) - 2.0 * j(0.5) + j(0.0));
  const double slope = 4.0 * j(0.5) - j(1.0) - 3.0 * j(0.0);
  const double vertex = -slope / (2.0 * curv);
  REQUIRE(curv > 0.0);
  REQUIRE(vertex > 0.1);
  REQUIRE(vertex < 0.9);

  const StepControl s = solve_step(xk, xk1, sys, 0);
  CHECK(s.c == Approx(vertex).epsilon(1e-5));

  double grid_best = 0.0;
  for (int i = 0; i <= 10000; ++i)
    if (j(i / 10000.0) < j(grid_best)) grid_best = i / 10000.0;
  CHECK(std::abs(s.c - grid_best) <= 1e-4);
  CHECK(s.objective <= j(grid_best) + 1e-12);
}

TEST_CASE("returned control is consistent") {
  const auto plan = interpolate_states(kStdNormal, kExample1Target, 4);
  const LinearSystem sys = example_system();
  for (int k = 0; k < 4; ++k) {
    const StepControl s = solve_step(plan.states[k], plan.states[k + 1], sys, k);
    CHECK(s.step == k);
    CHECK(s.c >= 0.0);
    CHECK(s.c <= 1.0);
    const Moments again = propagate_moments(plan.states[k], s.a_tilde, s.input_moments);
    for (Index l = 1; l <= 4; ++l)
      CHECK(std::abs(again[l] - plan.states[k + 1][l]) <= 1e-10 * (1.0 + std::abs(plan.states[k + 1][l])));
    CHECK(is_psd(hankel_from_moments(s.kernel_moments)));
    CHECK(is_psd(hankel_from_moments(s.control_moments)));
    CHECK(s.objective >= 0.0);

    const auto report = check_step_reachable(plan.states[k], plan.states[k + 1], sys, k);
    bool inside = false;
    for (auto [lo, hi] : report.feasible_intervals) inside |= lo <= s.c && s.c <= hi;
    CHECK(inside);
  }
}

TEST_CASE("step cost is convex along c") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0), gain(0.1, 0.95), scale(0.2, 2.0);
  int tested = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Moments xk = Moments::from_std(oracle::random_atoms(rng, 5).moments(4));
    const Moments xk1 = moments_of_independent_sum(
        Moments::from_std(oracle::random_atoms(rng, 5).moments(4)), moments_of(Gaussian{0.0, 2.0}, 4));
    const LinearSystem sys{{scale(rng)}, {gain(rng)}, 1.0};
    const double c1 = unit(rng), c2 = unit(rng), lam = unit(rng);
    if (!evaluate_gain(xk, xk1, sys, 0, c1).feasible || !evaluate_gain(xk, xk1, sys, 0, c2).feasible) continue;
    ++tested;
    auto j = [&](double c) { return control_objective(c, xk, xk1, sys.a[0], sys.b[0], kUnitNoise); };
    CHECK(j(lam * c1 + (1 - lam) * c2) <= lam * j(c1) + (1 - lam) * j(c2) + 1e-9);
  }
  CHECK(tested > 30);
}

TEST_CASE("infeasible step") {
  const LinearSystem one{{0.5}, {0.8}, 1.0};
  try {
    solve_step(Moments{0, 1}, Moments{0, 0.5}, one, 0);
    FAIL("expected an infeasible step");
  } catch (const InfeasibleStepError& e) {
    CHECK(e.report().step == 0);
    CHECK_FALSE(e.report().feasible);
  }
  CHECK_THROWS_AS(solve_step(kStdNormal, kStdNormal, one, 0, ControllerConfig{2}), DomainError);
}
