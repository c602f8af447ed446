#include <doctest.h>

#include <cmath>
#include <random>

#include "fpsteer/controller.hpp"
#include "fpsteer/random.hpp"
#include "fpsteer/realizer.hpp"
#include "fpsteer/simulation.hpp"
#include "oracles.hpp"

using namespace fpsteer;
using doctest::Approx;

namespace {

const HankelMatrix<double> kUnitHankel = hankel_from_moments(Moments{0, 1});
const Moments kExample1Target{0.8, 8, 12.8, 160};

Eigen::MatrixXd unit_lambda(Index dim) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim, dim);
  l(0, 0) = 1.0;
  return l;
}

Eigen::MatrixXd random_pd(std::mt19937_64& rng, Index dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd a(dim, dim);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(dim, dim);
}

// Integral of f over the realizer window of a Gaussian reference.
template <typename F>
double over_window(F&& f, const Gaussian& r, double half_width = 12.0) {
  const double sd = std::sqrt(r.variance);
  return oracle::integrate_panels(f, r.mean - half_width * sd, r.mean + half_width * sd);
}

}  // namespace

TEST_CASE("dual objective") {
  const DensitySpec r = Gaussian{0.0, 1.0};
  CHECK(objective_jr(unit_lambda(2), kUnitHankel, r) == Approx(1.0).epsilon(1e-12));
  CHECK(objective_jr(2.0 * unit_lambda(2), kUnitHankel, r) == Approx(2.0 - std::log(2.0)).epsilon(1e-12));

  SUBCASE("outside the cone") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 0, 0, -1;  // 1 - x^2
    CHECK_THROWS_AS(objective_jr(bad, kUnitHankel, r), DomainError);
    CHECK_THROWS_AS(gradient_jr(bad, kUnitHankel, r), DomainError);
  }
  SUBCASE("against an independent quadrature") {
    std::mt19937_64 rng(4);
    const Gaussian g{0.5, 2.0};
    const auto h = hankel_from_moments(moments_of(Gaussian{0.3, 1.5}, 4));
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd l = random_pd(rng, 3);
      const double integral = over_window(
          [&](double x) {
            const Eigen::Vector3d gx(1.0, x, x * x);
            return oracle::normal_pdf(x, g.mean, g.variance) * std::log(gx.dot(l * gx));
          },
          g);
      CHECK(objective_jr(l, h, g) == Approx((l * h.matrix()).trace() - integral).epsilon(1e-9));
    }
  }
}

TEST_CASE("dual gradient") {
  const DensitySpec r = Gaussian{0.0, 1.0};
  const Eigen::MatrixXd g0 = gradient_jr(unit_lambda(2), kUnitHankel, r);
  CHECK(g0.cwiseAbs().maxCoeff() < 1e-8);

  SUBCASE("finite differences, n = 2") {
    std::mt19937_64 rng(21);
    const auto h = hankel_from_moments(kExample1Target);
    const DensitySpec ref = Gaussian{0.8, 7.36};
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd l = random_pd(rng, 3);
      const Eigen::MatrixXd g = gradient_jr(l, h, ref);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (Index i = 0; i < 3; ++i)
        for (Index j = i; j < 3; ++j) {
          Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3, 3);
          e(i, j) = e(j, i) = 1.0;
          const double step = 1e-5 * std::max(1.0, std::abs(l(i, j)));
          const double fd = (objective_jr(l + step * e, h, ref) - objective_jr(l - step * e, h, ref)) / (2 * step);
          const double analytic = i == j ? g(i, j) : 2.0 * g(i, j);
          CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
        }
    }
  }
}

TEST_CASE("dual objective is convex along lines") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto h = hankel_from_moments(kExample1Target);
  const DensitySpec ref = Gaussian{0.8, 7.36};
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd l1 = random_pd(rng, 3), l2 = random_pd(rng, 3);
    const double t = unit(rng);
    const double mid = objective_jr(t * l1 + (1 - t) * l2, h, ref);
    CHECK(mid <= t * objective_jr(l1, h, ref) + (1 - t) * objective_jr(l2, h, ref) + 1e-9);
  }
}

TEST_CASE("a gaussian realized against itself is the reference") {
  for (double mu : {-2.0, 0.0, 2.0})
    for (double s2 : {0.5, 1.0, 4.0}) {
      const Gaussian g{mu, s2};
      const RealizedDensity rd = realize(moments_of(g, 4), g);
      double sup = 0.0;
      const double sd = std::sqrt(s2);
      for (int i = 0; i <= 4000; ++i) {
        const double x = mu - 12.0 * sd + i * 24.0 * sd / 4000.0;
        sup = std::max(sup, std::abs(realized_pdf(rd, x) - oracle::normal_pdf(x, mu, s2)));
      }
      CHECK(sup < 1e-6);
    }

  const RealizedDensity trivial = realize(Moments{0, 1}, Gaussian{0.0, 1.0});
  CHECK(realized_pdf(trivial, 0.0) == Approx(0.3989422804).epsilon(1e-9));
  CHECK(trivial.poly_min == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mixture target with the central-variance reference") {
  const Gaussian ref{0.8, 7.36};
  const RealizedDensity rd = realize(kExample1Target, ref);
  CHECK(rd.poly_min > 0.0);
  CHECK(rd.iterations > 0);
  const double mass = over_window([&](double x) { return realized_pdf(rd, x); }, ref);
  CHECK(std::abs(mass - 1.0) < 1e-6);
  for (int l = 1; l <= 4; ++l) {
    const double m = over_window([&](double x) { return std::pow(x, l) * realized_pdf(rd, x); }, ref);
    CHECK(std::abs(m - kExample1Target[l]) <= 1e-5 * std::abs(kExample1Target[l]));
  }
  SUBCASE("accepted iterates never increase the objective") {
    REQUIRE(rd.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < rd.objective_trace.size(); ++i)
      CHECK(rd.objective_trace[i] <= rd.objective_trace[i - 1]);
  }
  SUBCASE("density is nonnegative") {
    for (double x = -60.0; x <= 60.0; x += 0.25) CHECK(realized_pdf(rd, x) >= 0.0);
  }
  SUBCASE("gradient descent reaches the same density") {
    RealizerConfig slow;
    slow.optimizer = RealizerOptimizer::gradient;
    slow.max_iters = 200000;
    slow.grad_tol = 1e-7;
    const RealizedDensity gd = realize(kExample1Target, ref, slow);
    for (double x : {-6.0, -2.0, 0.0, 0.8, 3.0, 7.0})
      CHECK(realized_pdf(gd, x) == Approx(realized_pdf(rd, x)).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("realization preconditions") {
  CHECK_THROWS_AS(realize(Moments{2, 4, 8, 16}, Gaussian{2.0, 1.0}), DomainError);
  CHECK_THROWS_AS(realize(Moments{0, 1, 0}, Gaussian{0.0, 1.0}), DomainError);
  RealizerConfig even;
  even.nodes = 4000;
  CHECK_THROWS_AS(realize(Moments{0, 1}, Gaussian{0.0, 1.0}, even), DomainError);
}

TEST_CASE("default reference") {
  CHECK(std::get<Gaussian>(default_reference(Moments{0, 1, 0, 3})).variance == 1.0);
  const Gaussian g = std::get<Gaussian>(default_reference(Moments{0.5, 1.25, 0, 3}));
  CHECK(g.mean == 0.5);
  CHECK(g.variance == 1.0);
  CHECK(std::get<Gaussian>(default_reference(Moments{0.5, 1.25}, ReferenceVariance::raw_second_moment)).variance ==
        1.25);
  CHECK_THROWS_AS(default_reference(Moments{1, 1}), DomainError);
}

TEST_CASE("rejection sampler") {
  SUBCASE("acceptance rate equals the polynomial minimum") {
    const Gaussian ref{0.8, 7.36};
    const RealizedDensity rd = realize(kExample1Target, ref);
    REQUIRE(rd.poly_min < 0.999);
    SplitMix64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr int kProposals = 200'000;
    int accepted = 0;
    for (int i = 0; i < kProposals; ++i) {
      const double x = sample(rd.reference, rng);
      accepted += unit(rng) * rd.polynomial(x) <= rd.poly_min;
    }
    const double p = rd.poly_min;
    CHECK(std::abs(double(accepted) / kProposals - p) < 4.0 * std::sqrt(p * (1 - p) / kProposals));
  }
  SUBCASE("trivial realization accepts everything") {
    const RealizedDensity rd = realize(Moments{0, 1}, Gaussian{0.0, 1.0});
    SplitMix64 rng(6);
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = sample_realized(rd, rng);
    CHECK(std::abs(empirical_moments(xs, 2)[2] - 1.0) < 4.0 * std::sqrt(2.0 / xs.size()));
  }
  SUBCASE("first kernel of the mixture example") {
    const Moments x0{0, 1, 0, 3};
    const auto plan = interpolate_states(x0, kExample1Target, 4);
    const LinearSystem sys{std::vector<double>(4, 0.5), std::vector<double>(4, 0.8), 1.0};
    const StepControl s = solve_step(plan.states[0], plan.states[1], sys, 0);
    const RealizedDensity rd = realize_adaptive(s.kernel_moments);
    SplitMix64 rng(7);
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = sample_realized(rd, rng);
    const Moments got = empirical_moments(xs, 4);
    const Eigen::VectorXd se = moment_standard_errors(xs, 4);
    for (int l = 1; l <= 4; ++l) CHECK(std::abs(got[l] - rd.target_moments[l]) < 5.0 * se[l - 1]);
  }
  SUBCASE("tiny acceptance is refused") {
    RealizedDensity rd = realize(Moments{0, 1}, Gaussian{0.0, 1.0});
    rd.poly_min = 1e-6;
    SplitMix64 rng(8);
    CHECK_THROWS_AS(sample_realized(rd, rng), NumericalError);
  }
}

TEST_CASE("adaptive references") {
  SUBCASE("plain gaussian reference when it works") {
    const RealizedDensity rd = realize_adaptive(kExample1Target);
    const Gaussian& g = std::get<Gaussian>(rd.reference);
    CHECK(g.mean == 0.8);
    CHECK(g.variance == Approx(7.36));
  }
  SUBCASE("mixture fit reproduces a mixture") {
    const GaussianMixture mix{{0.9, 0.1}, {0.0, 1.0}, {1.0, 30.0}};
    const Moments m = moments_of(mix, 4);
    const GaussianMixture fit = std::get<GaussianMixture>(moment_fitted_reference(m, 1.0));
    const Moments back = moments_of(fit, 4);
    for (int l = 1; l <= 4; ++l) CHECK(back[l] == Approx(m[l]).epsilon(1e-3).scale(std::sqrt(m[2])));
  }
  SUBCASE("heavy tailed kernels still realize") {
    // kurtosis ~ 25, far beyond what r / q with a gaussian r can carry
    const GaussianMixture heavy{{0.95, 0.05}, {0.0, 0.0}, {1.0, 20.0}};
    const Moments m = moments_of(heavy, 4);
    const RealizedDensity rd = realize_adaptive(m);
    CHECK(rd.moment_residual <= 1e-6);
    CHECK(rd.poly_min > kMinAcceptanceRate);
  }
  CHECK_THROWS_AS(moment_fitted_reference(Moments{0, 1}), DomainError);
}

TEST_CASE("moment verification and polynomial minimum") {
  const RealizedDensity rd = realize(kExample1Target, Gaussian{0.8, 7.36});
  const Moments v = verify_moments(rd);
  for (int l = 1; l <= 4; ++l) CHECK(v[l] == Approx(kExample1Target[l]).epsilon(1e-6));
  CHECK(rd.moment_residual <= 1e-6);

  Eigen::VectorXd quartic(5);
  quartic << 3, 0, -4, 0, 1;  // (x^2 - 2)^2 - 1, minimum -1 at +-sqrt 2
  CHECK(polynomial_minimum(quartic, -10, 10) == Approx(-1.0).epsilon(1e-12));
  Eigen::VectorXd shifted(3);
  shifted << 5, -2, 1;  // (x - 1)^2 + 4
  CHECK(polynomial_minimum(shifted, -3, 3) == Approx(4.0).epsilon(1e-12));
}
