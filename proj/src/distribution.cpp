#include "fpsteer/distribution.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>

#include "fpsteer/quadrature.hpp"

namespace fpsteer {

namespace {

constexpr double kWindowScaleUnits = 40.0;
constexpr double kQuadratureRelTol = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_weights(const std::vector<double>& weights, std::size_t components) {
  if (weights.empty() || weights.size() != components)
    throw DomainError("mixture weights must match the number of components");
  for (double w : weights)
    if (!(w > 0.0)) throw DomainError("mixture weights must be positive");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
}

double normal_pdf(double x, double mean, double variance) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double glogistic_pdf(double x, double shape, double location) {
  const double z = x - location;
  // log pdf = log a - z - (a+1) log(1 + e^{-z}), rearranged per sign of z
  const double log_pdf = z >= 0.0
                             ? std::log(shape) - z - (shape + 1.0) * std::log1p(std::exp(-z))
                             : std::log(shape) + shape * z - (shape + 1.0) * std::log1p(std::exp(z));
  return std::exp(log_pdf);
}

double glogistic_cdf(double x, double shape, double location) {
  const double z = x - location;
  return z >= 0.0 ? std::exp(-shape * std::log1p(std::exp(-z)))
                  : std::exp(shape * (z - std::log1p(std::exp(z))));
}

Vector<double> gaussian_raw_moments(double mean, double variance, Index order) {
  // m_l = mean m_{l-1} + (l-1) variance m_{l-2}
  Vector<double> m(order + 1);
  m[0] = 1.0;
  if (order >= 1) m[1] = mean;
  for (Index l = 2; l <= order; ++l) m[l] = mean * m[l - 1] + double(l - 1) * variance * m[l - 2];
  return m.tail(order);
}

}  // namespace

void validate(const DensitySpec& spec) {
  std::visit(Overloaded{
                 [](const Gaussian& g) {
                   if (!(g.variance > 0.0) || !std::isfinite(g.mean))
                     throw DomainError("gaussian variance must be positive");
                 },
                 [](const GaussianMixture& m) {
                   check_weights(m.weights, m.means.size());
                   if (m.variances.size() != m.means.size())
                     throw DomainError("gaussian mixture means/variances length mismatch");
                   for (double v : m.variances)
                     if (!(v > 0.0)) throw DomainError("gaussian mixture variances must be positive");
                 },
                 [](const GeneralizedLogistic& g) {
                   if (!(g.shape > 0.0) || !std::isfinite(g.location))
                     throw DomainError("generalized logistic shape must be positive");
                 },
                 [](const GeneralizedLogisticMixture& m) {
                   check_weights(m.weights, m.shapes.size());
                   if (m.locations.size() != m.shapes.size())
                     throw DomainError("logistic mixture shapes/locations length mismatch");
                   for (double s : m.shapes)
                     if (!(s > 0.0)) throw DomainError("logistic mixture shapes must be positive");
                 },
             },
             spec);
}

std::string kind_name(const DensitySpec& spec) {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const GaussianMixture&) { return std::string("gaussian_mixture"); },
                        [](const GeneralizedLogistic&) { return std::string("generalized_logistic"); },
                        [](const GeneralizedLogisticMixture&) {
                          return std::string("glogistic_mixture");
                        },
                    },
                    spec);
}

double pdf_eval(const DensitySpec& spec, double x) {
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return normal_pdf(x, g.mean, g.variance); },
          [x](const GaussianMixture& m) {
            double p = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i)
              p += m.weights[i] * normal_pdf(x, m.means[i], m.variances[i]);
            return p;
          },
          [x](const GeneralizedLogistic& g) { return glogistic_pdf(x, g.shape, g.location); },
          [x](const GeneralizedLogisticMixture& m) {
            double p = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i)
              p += m.weights[i] * glogistic_pdf(x, m.shapes[i], m.locations[i]);
            return p;
          },
      },
      spec);
}

double cdf_eval(const DensitySpec& spec, double x) {
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return normal_cdf(x, g.mean, g.variance); },
          [x](const GaussianMixture& m) {
            double p = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i)
              p += m.weights[i] * normal_cdf(x, m.means[i], m.variances[i]);
            return p;
          },
          [x](const GeneralizedLogistic& g) { return glogistic_cdf(x, g.shape, g.location); },
          [x](const GeneralizedLogisticMixture& m) {
            double p = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i)
              p += m.weights[i] * glogistic_cdf(x, m.shapes[i], m.locations[i]);
            return p;
          },
      },
      spec);
}

std::pair<double, double> quadrature_window(const DensitySpec& spec) {
  auto widen = [](std::pair<double, double> w, double center, double scale) {
    return std::pair{std::min(w.first, center - kWindowScaleUnits * scale),
                     std::max(w.second, center + kWindowScaleUnits * scale)};
  };
  constexpr std::pair<double, double> empty{std::numeric_limits<double>::infinity(),
                                            -std::numeric_limits<double>::infinity()};
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) { return widen(empty, g.mean, std::sqrt(g.variance)); },
          [&](const GaussianMixture& m) {
            auto w = empty;
            for (std::size_t i = 0; i < m.means.size(); ++i)
              w = widen(w, m.means[i], std::sqrt(m.variances[i]));
            return w;
          },
          [&](const GeneralizedLogistic& g) { return widen(empty, g.location, 1.0); },
          [&](const GeneralizedLogisticMixture& m) {
            auto w = empty;
            for (double loc : m.locations) w = widen(w, loc, 1.0);
            return w;
          },
      },
      spec);
}

bool has_closed_form(const DensitySpec& spec) {
  return std::holds_alternative<Gaussian>(spec) || std::holds_alternative<GaussianMixture>(spec);
}

Moments moments_of(const DensitySpec& spec, Index order, MomentMethod method) {
  validate(spec);
  if (order < 1) throw DomainError("moment order must be >= 1");

  if (method == MomentMethod::closed_form) {
    if (const auto* g = std::get_if<Gaussian>(&spec))
      return Moments(gaussian_raw_moments(g->mean, g->variance, order));
    if (const auto* m = std::get_if<GaussianMixture>(&spec)) {
      Vector<double> acc = Vector<double>::Zero(order);
      for (std::size_t i = 0; i < m->weights.size(); ++i)
        acc += m->weights[i] * gaussian_raw_moments(m->means[i], m->variances[i], order);
      return Moments(std::move(acc));
    }
    throw DomainError("no closed-form moments for density kind " + kind_name(spec));
  }

  const auto [lo, hi] = quadrature_window(spec);
  auto integrand = [&spec, order](double x) {
    Eigen::VectorXd v(order);
    const double p = pdf_eval(spec, x);
    double power = 1.0;
    for (Index l = 0; l < order; ++l) {
      power *= x;
      v[l] = power * p;
    }
    return v;
  };
  try {
    return Moments(adaptive_simpson(integrand, lo, hi, kQuadratureRelTol));
  } catch (const NumericalError& e) {
    throw NumericalError("moments of " + kind_name(spec) + ": " + e.what());
  }
}

}  // namespace fpsteer
