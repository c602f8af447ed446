#ifndef FPSTEER_DISTRIBUTION_HPP
#define FPSTEER_DISTRIBUTION_HPP

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fpsteer/moment_algebra.hpp"

namespace fpsteer {

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
};

/// Type-I generalized logistic: shape * e^{-z} / (1 + e^{-z})^{shape+1}, z = x - location.
struct GeneralizedLogistic {
  double shape = 1.0;
  double location = 0.0;
};

struct GeneralizedLogisticMixture {
  std::vector<double> weights;
  std::vector<double> shapes;
  std::vector<double> locations;
};

using DensitySpec =
    std::variant<Gaussian, GaussianMixture, GeneralizedLogistic, GeneralizedLogisticMixture>;

enum class MomentMethod { closed_form, quadrature };

/// Throws DomainError on non-positive variances/shapes or bad mixture weights.
void validate(const DensitySpec& spec);

std::string kind_name(const DensitySpec& spec);

double pdf_eval(const DensitySpec& spec, double x);
double cdf_eval(const DensitySpec& spec, double x);

/// Integration window: location -/+ 40 scale units, widened over mixture components.
std::pair<double, double> quadrature_window(const DensitySpec& spec);

bool has_closed_form(const DensitySpec& spec);

Moments moments_of(const DensitySpec& spec, Index order,
                   MomentMethod method = MomentMethod::closed_form);

namespace detail {

template <typename Urbg>
double open_unit_uniform(Urbg& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = 0.0;
  while (u == 0.0) u = unit(rng);
  return u;
}

template <typename Urbg>
std::size_t pick_component(const std::vector<double>& weights, Urbg& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return weights.size() - 1;
}

template <typename Urbg>
double sample_gaussian(double mean, double variance, Urbg& rng) {
  return std::normal_distribution<double>(mean, std::sqrt(variance))(rng);
}

template <typename Urbg>
double sample_glogistic(double shape, double location, Urbg& rng) {
  const double u = open_unit_uniform(rng);
  return location - std::log(std::pow(u, -1.0 / shape) - 1.0);
}

}  // namespace detail

/// One draw from spec. Mixtures choose a component by weight first.
template <typename Urbg>
double sample(const DensitySpec& spec, Urbg& rng) {
  struct Visitor {
    Urbg& rng;
    double operator()(const Gaussian& g) const {
      return detail::sample_gaussian(g.mean, g.variance, rng);
    }
    double operator()(const GaussianMixture& m) const {
      const auto i = detail::pick_component(m.weights, rng);
      return detail::sample_gaussian(m.means[i], m.variances[i], rng);
    }
    double operator()(const GeneralizedLogistic& g) const {
      return detail::sample_glogistic(g.shape, g.location, rng);
    }
    double operator()(const GeneralizedLogisticMixture& m) const {
      const auto i = detail::pick_component(m.weights, rng);
      return detail::sample_glogistic(m.shapes[i], m.locations[i], rng);
    }
  };
  return std::visit(Visitor{rng}, spec);
}

}  // namespace fpsteer

#endif  // FPSTEER_DISTRIBUTION_HPP
