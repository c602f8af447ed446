#include <doctest.h>

#include <algorithm>
#include <vector>

#include "fpsteer/distribution.hpp"
#include "fpsteer/random.hpp"
#include "fpsteer/simulation.hpp"
#include "oracles.hpp"

using namespace fpsteer;
using doctest::Approx;

namespace {

const GaussianMixture kExample1Target{{0.3, 0.7}, {-2.0, 2.0}, {4.0, 4.0}};
const GeneralizedLogisticMixture kExample2Target{{0.4, 0.6}, {2.0, 3.0}, {0.0, -2.0}};

std::vector<DensitySpec> catalog() {
  return {Gaussian{0.0, 1.0},         Gaussian{-1.5, 0.25}, kExample1Target,
          GeneralizedLogistic{2.0, 0.0}, GeneralizedLogistic{0.5, 3.0}, kExample2Target};
}

}  // namespace

TEST_CASE("pdf values") {
  CHECK(pdf_eval(Gaussian{0.0, 1.0}, 0.0) == Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(pdf_eval(GeneralizedLogistic{2.0, 0.0}, 0.0) == Approx(0.25).epsilon(1e-14));
  const double want = 0.3 * oracle::normal_pdf(2.0, -2.0, 4.0) + 0.7 * oracle::normal_pdf(2.0, 2.0, 4.0);
  CHECK(pdf_eval(kExample1Target, 2.0) == Approx(want).epsilon(1e-14));
  CHECK(want == Approx(0.147728).epsilon(1e-5));

  SUBCASE("logistic pdf agrees with the oracle far into both tails") {
    for (double x : {-60.0, -20.0, -1.0, 0.0, 2.5, 30.0, 200.0}) {
      const double got = pdf_eval(GeneralizedLogistic{3.0, -2.0}, x);
      const double ref = oracle::glogistic_pdf(x, 3.0, -2.0);
      CHECK(got == Approx(ref).epsilon(1e-12).scale(1e-300));
    }
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(Gaussian{0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(validate(GaussianMixture{{0.5, 0.4}, {0, 1}, {1, 1}}), DomainError);
  CHECK_THROWS_AS(validate(GaussianMixture{{0.5, 0.5}, {0, 1}, {1, -1}}), DomainError);
  CHECK_THROWS_AS(validate(GeneralizedLogistic{0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(validate(GeneralizedLogisticMixture{{1.1, -0.1}, {1, 1}, {0, 0}}), DomainError);
  CHECK_NOTHROW(validate(GaussianMixture{{0.5, 0.5 + 5e-13}, {0, 1}, {1, 1}}));
}

TEST_CASE("densities integrate to one over their window") {
  for (const auto& spec : catalog()) {
    const auto [lo, hi] = quadrature_window(spec);
    const double mass = oracle::integrate_panels([&](double x) { return pdf_eval(spec, x); }, lo, hi);
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("closed-form moments") {
  CHECK(moments_of(Gaussian{0.0, 1.0}, 4) == Moments{0, 1, 0, 3});
  const Moments m = moments_of(kExample1Target, 4);
  const auto want = oracle::mixture_moments4({0.3, 0.7}, {-2, 2}, {4, 4});
  for (int l = 1; l <= 4; ++l) CHECK(m[l] == Approx(want[l - 1]).epsilon(1e-14));
  const Moments exact{0.8, 8.0, 12.8, 160.0};
  for (int l = 1; l <= 4; ++l) CHECK(m[l] == Approx(exact[l]).epsilon(1e-14));
  CHECK_THROWS_AS(moments_of(kExample2Target, 4, MomentMethod::closed_form), DomainError);
}

TEST_CASE("closed-form and quadrature paths agree") {
  for (const DensitySpec& spec : {DensitySpec(Gaussian{0.3, 2.0}), DensitySpec(kExample1Target),
                                  DensitySpec(GaussianMixture{{0.2, 0.5, 0.3}, {-3, 0, 4}, {0.5, 1, 2}})}) {
    const Moments cf = moments_of(spec, 8, MomentMethod::closed_form);
    const Moments q = moments_of(spec, 8, MomentMethod::quadrature);
    for (Index l = 1; l <= 8; ++l)
      CHECK(std::abs(cf[l] - q[l]) <= 1e-8 * std::max(1.0, std::abs(cf[l])));
  }
}

TEST_CASE("logistic mixture moments by quadrature") {
  const Moments m = moments_of(kExample2Target, 4, MomentMethod::quadrature);
  const auto ref = oracle::raw_moments(
      [](double x) {
        return 0.4 * oracle::glogistic_pdf(x, 2.0, 0.0) + 0.6 * oracle::glogistic_pdf(x, 3.0, -2.0);
      },
      4, -120.0, 120.0);
  for (int l = 1; l <= 4; ++l) CHECK(m[l] == Approx(ref[l - 1]).epsilon(1e-9));
  const double mean = 0.4 * oracle::glogistic_mean(2.0, 0.0) + 0.6 * oracle::glogistic_mean(3.0, -2.0);
  CHECK(m[1] == Approx(mean).epsilon(1e-9));
}

TEST_CASE("sampling") {
  constexpr int kDraws = 100'000;
  SUBCASE("normal second moment") {
    SplitMix64 rng(1);
    std::vector<double> xs(kDraws);
    for (auto& x : xs) x = sample(Gaussian{0.0, 1.0}, rng);
    CHECK(std::abs(empirical_moments(xs, 2)[2] - 1.0) < 4.0 * std::sqrt(2.0 / kDraws));
  }
  SUBCASE("mixture component frequencies") {
    // with far-apart components the sign of a draw identifies its component
    SplitMix64 rng(2);
    const GaussianMixture far{{0.3, 0.7}, {-50.0, 50.0}, {1.0, 1.0}};
    int first = 0;
    for (int i = 0; i < kDraws; ++i) first += sample(far, rng) < 0.0;
    CHECK(std::abs(double(first) / kDraws - 0.3) < 4.0 * std::sqrt(0.21 / kDraws));
  }
  SUBCASE("logistic draws follow the analytic cdf") {
    SplitMix64 rng(3);
    std::vector<double> xs(kDraws);
    for (auto& x : xs) x = sample(GeneralizedLogistic{2.0, 1.0}, rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double f = std::pow(1.0 + std::exp(-(xs[i] - 1.0)), -2.0);
      ks = std::max({ks, std::abs(f - double(i) / kDraws), std::abs(f - double(i + 1) / kDraws)});
    }
    CHECK(ks < 1.95 / std::sqrt(double(kDraws)));
  }
  SUBCASE("draws reproduce catalog moments") {
    std::uint64_t seed = 10;
    for (const auto& spec : catalog()) {
      SplitMix64 rng(seed++);
      std::vector<double> xs(kDraws);
      for (auto& x : xs) x = sample(spec, rng);
      const Moments want =
          moments_of(spec, 4, has_closed_form(spec) ? MomentMethod::closed_form : MomentMethod::quadrature);
      const Moments got = empirical_moments(xs, 4);
      const Eigen::VectorXd se = moment_standard_errors(xs, 4);
      for (int l = 1; l <= 4; ++l) CHECK(std::abs(got[l] - want[l]) < 5.0 * se[l - 1]);
    }
  }
}

TEST_CASE("cdf") {
  CHECK(cdf_eval(Gaussian{0.0, 1.0}, 0.0) == Approx(0.5));
  CHECK(cdf_eval(GeneralizedLogistic{2.0, 0.0}, 0.0) == Approx(0.25));
  CHECK(cdf_eval(kExample1Target, 0.0) == Approx(0.3 * 0.8413447460685429 + 0.7 * 0.15865525393145707));
}
