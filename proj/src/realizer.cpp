#include "fpsteer/realizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fpsteer/quadrature.hpp"

namespace fpsteer {

namespace {

/// Simpson grid spanning the reference mean -/+ half_width standard deviations.
/// Weights already carry the reference density: sum_j w_j f(x_j) ~ \int r f.
struct Grid {
  Eigen::VectorXd x;
  Eigen::VectorXd z;  // (x - mean) / sd
  Eigen::VectorXd w;
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0, hi = 0.0;  // window in z
};

/// half_width standard deviations around each mixture component, in z.
std::pair<double, double> standardized_window(const DensitySpec& r, double mean, double sd,
                                              double half_width) {
  if (const auto* m = std::get_if<GaussianMixture>(&r)) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < m->means.size(); ++i) {
      const double c = (m->means[i] - mean) / sd;
      const double s = std::sqrt(m->variances[i]) / sd;
      lo = std::min(lo, c - half_width * s);
      hi = std::max(hi, c + half_width * s);
    }
    return {lo, hi};
  }
  return {-half_width, half_width};
}

Grid make_grid(const DensitySpec& r, const RealizerConfig& config) {
  Grid g;
  std::tie(g.mean, g.sd) = reference_location_scale(r);
  std::tie(g.lo, g.hi) = standardized_window(r, g.mean, g.sd, config.half_width);
  const Index n = config.nodes;
  const double h = (g.hi - g.lo) / double(n - 1);
  g.z = Eigen::VectorXd::LinSpaced(n, g.lo, g.hi);
  g.x = g.mean + g.sd * g.z.array();
  g.w = simpson_weights(n, h) * g.sd;
  for (Index j = 0; j < n; ++j) g.w[j] *= pdf_eval(r, g.x[j]);
  return g;
}

Eigen::MatrixXd vandermonde(const Eigen::VectorXd& x, Index degree) {
  Eigen::MatrixXd v(x.size(), degree + 1);
  v.col(0).setOnes();
  for (Index k = 1; k <= degree; ++k) v.col(k) = v.col(k - 1).cwiseProduct(x);
  return v;
}

/// Hankel-structured L whose quadratic form is sum_k coeffs[k] x^k.
Eigen::MatrixXd lambda_from_coefficients(const Eigen::VectorXd& coeffs) {
  const Index dim = coeffs.size() / 2 + 1;
  Eigen::MatrixXd lambda(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) {
      const Index k = i + j;
      const Index pairs = std::min(k, 2 * (dim - 1) - k) + 1;
      lambda(i, j) = coeffs[k] / double(pairs);
    }
  return lambda;
}

/// Coefficients of q(x) = sum_k c_k ((x - mean)/sd)^k in the monomial basis of x.
Eigen::VectorXd unstandardize(const Eigen::VectorXd& coeffs, double mean, double sd) {
  const Index degree = coeffs.size() - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(degree + 1);
  for (Index k = 0; k <= degree; ++k) {
    const Eigen::VectorXd binom = binomial_row<double>(k);
    const double scale = coeffs[k] / std::pow(sd, double(k));
    for (Index j = 0; j <= k; ++j) out[j] += scale * binom[j] * std::pow(-mean, double(k - j));
  }
  return out;
}

Eigen::VectorXd quadratic_form(const Eigen::MatrixXd& v, const Eigen::MatrixXd& lambda) {
  return ((v * lambda).array() * v.array()).rowwise().sum();
}

void check_dims(const Eigen::MatrixXd& lambda, const HankelMatrix<double>& h) {
  if (lambda.rows() != h.dim() || lambda.cols() != h.dim())
    throw DomainError("dual matrix and Hankel matrix dimensions differ");
}

/// Dual objective in polynomial-coefficient form on standardized coordinates,
/// plus mu times a log barrier on a wide uniform grid. Far from the reference
/// mean r is tiny, so without the barrier Newton steps run into the cone
/// boundary there and stall.
struct DualProblem {
  Eigen::MatrixXd powers;    // N x (2n+1)
  Eigen::VectorXd weights;   // N
  Eigen::VectorXd moments;   // (1, m_1, ..., m_2n) of z
  double lo, hi;
  Eigen::MatrixXd barrier_powers;
  double barrier_weight = 0.0;  // per barrier node
  double mu = 0.0;

  /// +inf outside the admissible cone.
  double value(const Eigen::VectorXd& p) const {
    if (!(p[p.size() - 1] > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd q = powers * p;
    if (!(q.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
    if (!(polynomial_minimum(p, lo, hi) > 0.0))
      return std::numeric_limits<double>::infinity();
    double v = p.dot(moments) - weights.dot(q.array().log().matrix());
    if (mu > 0.0) {
      const Eigen::ArrayXd qb = (barrier_powers * p).array();
      if (!(qb.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
      v -= mu * barrier_weight * qb.log().sum();
    }
    return v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& p) const {
    const Eigen::VectorXd q = powers * p;
    Eigen::VectorXd g = moments - powers.transpose() * weights.cwiseQuotient(q);
    if (mu > 0.0)
      g -= mu * barrier_weight * barrier_powers.transpose() * (barrier_powers * p).cwiseInverse();
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& p) const {
    const Eigen::VectorXd q = powers * p;
    const Eigen::VectorXd d = weights.array() / q.array().square();
    Eigen::MatrixXd h = powers.transpose() * d.asDiagonal() * powers;
    if (mu > 0.0) {
      const Eigen::VectorXd db = mu * barrier_weight * (barrier_powers * p).array().square().inverse();
      h += barrier_powers.transpose() * db.asDiagonal() * barrier_powers;
    }
    return h;
  }
};

}  // namespace

void RealizerConfig::validate() const {
  if (nodes < 3 || nodes % 2 == 0) throw DomainError("realizer node count must be odd and >= 3");
  if (!(half_width > 0.0) || max_iters < 1 || !(grad_tol > 0.0) || !(moment_tol > 0.0))
    throw DomainError("realizer settings must be positive");
  if (max_widenings < 0) throw DomainError("realizer max_widenings must be >= 0");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw DomainError("realizer backtracking factor must lie in (0, 1)");
}

double RealizedDensity::polynomial(double x) const {
  const Index dim = lambda.rows();
  Eigen::VectorXd g(dim);
  g[0] = 1.0;
  for (Index i = 1; i < dim; ++i) g[i] = g[i - 1] * x;
  return g.dot(lambda * g);
}

std::pair<double, double> reference_location_scale(const DensitySpec& r) {
  if (const auto* g = std::get_if<Gaussian>(&r)) return {g->mean, std::sqrt(g->variance)};
  const Moments m = moments_of(
      r, 2, has_closed_form(r) ? MomentMethod::closed_form : MomentMethod::quadrature);
  return {m[1], std::sqrt(m[2] - m[1] * m[1])};
}

double objective_jr(const Eigen::MatrixXd& lambda, const HankelMatrix<double>& h,
                    const DensitySpec& r, const RealizerConfig& config) {
  config.validate();
  check_dims(lambda, h);
  const Grid grid = make_grid(r, config);
  const Eigen::VectorXd q = quadratic_form(vandermonde(grid.x, h.dim() - 1), lambda);
  if (!(q.minCoeff() > 0.0))
    throw DomainError("G'LG is not positive on the quadrature grid (L outside the dual cone)");
  return (lambda * h.matrix()).trace() - grid.w.dot(q.array().log().matrix());
}

Eigen::MatrixXd gradient_jr(const Eigen::MatrixXd& lambda, const HankelMatrix<double>& h,
                            const DensitySpec& r, const RealizerConfig& config) {
  config.validate();
  check_dims(lambda, h);
  const Grid grid = make_grid(r, config);
  const Eigen::MatrixXd v = vandermonde(grid.x, h.dim() - 1);
  const Eigen::VectorXd q = quadratic_form(v, lambda);
  if (!(q.minCoeff() > 0.0))
    throw DomainError("G'LG is not positive on the quadrature grid (L outside the dual cone)");
  const Eigen::VectorXd d = grid.w.cwiseQuotient(q);
  Eigen::MatrixXd grad = h.matrix() - v.transpose() * d.asDiagonal() * v;
  return 0.5 * (grad + grad.transpose());
}

DensitySpec default_reference(const Moments& f, ReferenceVariance variance) {
  if (f.order() < 2) throw DomainError("reference needs kernel moments up to order 2");
  const double v = variance == ReferenceVariance::central ? f[2] - f[1] * f[1] : f[2];
  if (!(v > 0.0)) throw DomainError("kernel moments have non-positive variance; no Gaussian reference");
  return Gaussian{f[1], v};
}

namespace {

Vector<double> gaussian_moments(double mean, double variance, Index order) {
  Vector<double> m(order);
  double prev2 = 1.0, prev = mean;
  m[0] = mean;
  for (Index l = 2; l <= order; ++l) {
    const double next = mean * prev + double(l - 1) * variance * prev2;
    m[l - 1] = next;
    prev2 = prev;
    prev = next;
  }
  return m;
}

// parameters: logit weight, two means, two log variances
struct MixtureFit {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Moments target;  // standardized

  int inputs() const { return 5; }
  int values() const { return int(target.order()) + 1; }

  static GaussianMixture unpack(const Eigen::VectorXd& t) {
    const double w = 1.0 / (1.0 + std::exp(-t[0]));
    return {{w, 1.0 - w}, {t[1], t[2]}, {std::exp(t[3]), std::exp(t[4])}};
  }

  int operator()(const Eigen::VectorXd& t, Eigen::VectorXd& r) const {
    const GaussianMixture g = unpack(t);
    const Index order = target.order();
    const Vector<double> m = g.weights[0] * gaussian_moments(g.means[0], g.variances[0], order) +
                             g.weights[1] * gaussian_moments(g.means[1], g.variances[1], order);
    r.resize(order + 1);
    for (Index l = 1; l <= order; ++l)
      r[l - 1] = (m[l - 1] - target[l]) / std::max(1.0, std::abs(target[l]));
    r[order] = 1e-3 * (t[3] - t[4]);  // the fit has one spare degree of freedom
    return 0;
  }
};

}  // namespace

DensitySpec moment_fitted_reference(const Moments& f, double inflation) {
  if (f.order() < 4) throw DomainError("moment fitted reference needs moments up to order 4");
  if (!(inflation > 0.0)) throw DomainError("reference inflation must be positive");
  const double mean = f[1];
  const double variance = f[2] - mean * mean;
  if (!(variance > 0.0)) throw DomainError("kernel moments have non-positive variance");
  const double sd = std::sqrt(variance);
  const Moments shifted =
      moments_of_independent_sum(f, moments_of_scaled(Moments(Vector<double>::Ones(f.order())), -mean));
  MixtureFit fit{moments_of_scaled(shifted, 1.0 / sd)};

  Eigen::VectorXd best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (double w0 : {0.5, 0.8, 0.95, 0.99})
    for (double side : {1.0, -1.0}) {
      Eigen::VectorXd t(5);
      t << std::log(w0 / (1.0 - w0)), -0.1 * side, side, std::log(0.5), std::log(0.5);
      Eigen::NumericalDiff<MixtureFit> diff(fit);
      Eigen::LevenbergMarquardt<Eigen::NumericalDiff<MixtureFit>> lm(diff);
      lm.parameters.maxfev = 4000;
      lm.minimize(t);
      Eigen::VectorXd r;
      fit(t, r);
      const double norm = r.head(r.size() - 1).cwiseAbs().maxCoeff();
      if (std::isfinite(norm) && norm < best_norm) {
        best_norm = norm;
        best = t;
      }
    }
  if (!(best_norm < 1e-3))
    throw NumericalError("mixture reference fit left a moment residual of " +
                         std::to_string(best_norm));
  GaussianMixture g = MixtureFit::unpack(best);
  for (std::size_t i = 0; i < 2; ++i) {
    g.means[i] = mean + sd * g.means[i];
    g.variances[i] *= variance * inflation;
  }
  return g;
}

RealizedDensity realize_adaptive(const Moments& m, const RealizerConfig& config) {
  const Gaussian base = std::get<Gaussian>(default_reference(m, config.reference_variance));
  std::vector<DensitySpec> references;
  for (int w = 0; w <= config.max_widenings; ++w)
    references.push_back(Gaussian{base.mean, std::ldexp(base.variance, w)});

  std::optional<NumericalError> first;
  auto attempt = [&](const DensitySpec& r) -> std::optional<RealizedDensity> {
    try {
      return realize(m, r, config);
    } catch (const NumericalError& e) {
      if (!first) first = e;
      return std::nullopt;
    }
  };
  for (const auto& r : references)
    if (auto rd = attempt(r)) return *rd;
  if (m.order() >= 4)
    for (double inflation : {1.5, 2.0}) {
      DensitySpec r;
      try {
        r = moment_fitted_reference(m, inflation);
      } catch (const NumericalError&) {
        break;
      }
      if (auto rd = attempt(r)) return *rd;
    }
  throw *first;
}

double polynomial_minimum(const Eigen::VectorXd& coeffs, double scan_lo, double scan_hi) {
  Index degree = coeffs.size() - 1;
  while (degree > 0 && coeffs[degree] == 0.0) --degree;
  if (degree == 0) return coeffs[0];
  if (degree % 2 == 1 || coeffs[degree] < 0.0) return -std::numeric_limits<double>::infinity();

  auto eval = [&](double x) {
    double acc = 0.0;
    for (Index k = degree; k >= 0; --k) acc = acc * x + coeffs[k];
    return acc;
  };

  double best = std::numeric_limits<double>::infinity();
  // critical points: roots of q', via the companion matrix of q' / leading
  const Index d = degree - 1;
  if (d == 1) {
    best = eval(-coeffs[1] / (2.0 * coeffs[2]));
  } else {
    const double lead = double(degree) * coeffs[degree];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    companion.bottomLeftCorner(d - 1, d - 1).setIdentity();
    for (Index k = 0; k < d; ++k) companion(k, d - 1) = -double(k + 1) * coeffs[k + 1] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() == Eigen::Success) {
      for (const auto& root : solver.eigenvalues())
        if (std::abs(root.imag()) <= 1e-7 * (1.0 + std::abs(root)))
          best = std::min(best, eval(root.real()));
    }
  }
  const int scan = 2001;
  for (int i = 0; i < scan; ++i)
    best = std::min(best, eval(scan_lo + (scan_hi - scan_lo) * double(i) / double(scan - 1)));
  return best;
}

RealizedDensity realize(const Moments& m, const DensitySpec& r, const RealizerConfig& config) {
  config.validate();
  validate(r);
  if (m.order() % 2 != 0) throw DomainError("realization needs an even moment order");
  const auto h = hankel_from_moments(m);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix(), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    if (!(ev.minCoeff() > 1e-9 * (1.0 + ev.cwiseAbs().maxCoeff())))
      throw DomainError("Hankel matrix of the kernel moments is not positive definite (min eig " +
                        std::to_string(ev.minCoeff()) + ")");
  }

  const Index order = m.order();
  const Grid grid = make_grid(r, config);
  const Moments shifted =
      moments_of_independent_sum(m, moments_of_scaled(Moments(Vector<double>::Ones(order)), -grid.mean));
  const Moments standardized = moments_of_scaled(shifted, 1.0 / grid.sd);

  DualProblem dual{vandermonde(grid.z, order), grid.w, standardized.with_zeroth(), grid.lo, grid.hi};
  {
    const double reach = 4.0 * std::max(std::abs(grid.lo), std::abs(grid.hi));
    const Index nodes = 801;
    dual.barrier_powers = vandermonde(Eigen::VectorXd::LinSpaced(nodes, -reach, reach), order);
    dual.barrier_weight = 1.0 / double(nodes);
  }

  // L = identity, so G'LG = 1 + z^2 + ... + z^2n and equals 1 at the reference mean
  Eigen::VectorXd p = Eigen::VectorXd::Zero(order + 1);
  for (Index k = 0; k <= order; k += 2) p[k] = 1.0;

  RealizedDensity rd;
  rd.reference = r;
  rd.target_moments = m;

  // the barrier weight shrinks to zero; only the last stage is the actual J_r
  int iter = 0;
  Eigen::VectorXd grad;
  for (double mu : {1e-2, 1e-4, 1e-6, 1e-8, 0.0}) {
    dual.mu = mu;
    double value = dual.value(p);
    if (mu == 0.0) rd.objective_trace.push_back(value);
    grad = dual.gradient(p);
    const double tol = mu > 0.0 ? std::max(config.grad_tol, 1e-6) : config.grad_tol;
    for (; iter < config.max_iters && grad.cwiseAbs().maxCoeff() > tol; ++iter) {
      Eigen::VectorXd direction;
      if (config.optimizer == RealizerOptimizer::newton) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(dual.hessian(p));
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) direction = -ldlt.solve(grad);
      }
      if (direction.size() == 0 || !(direction.dot(grad) < 0.0)) {
        // a step along -dJ/dL changes coefficient k by the number of (i, j) with i + j = k
        direction = -grad;
        for (Index k = 0; k <= order; ++k) direction[k] *= double(std::min(k, order - k) + 1);
      }

      const double slope = grad.dot(direction);
      double step = 1.0;
      Eigen::VectorXd trial;
      double trial_value = std::numeric_limits<double>::infinity();
      while (step > 1e-20) {
        trial = p + step * direction;
        trial_value = dual.value(trial);
        if (trial_value <= value + 1e-4 * step * slope) break;
        step *= config.backtrack;
      }
      if (!(trial_value <= value + 1e-4 * step * slope)) break;
      if (mu > 0.0 && !(trial_value < value)) break;
      p = trial;
      value = trial_value;
      if (mu == 0.0) rd.objective_trace.push_back(value);
      grad = dual.gradient(p);
    }
  }
  rd.iterations = iter;
  const double final_grad = grad.cwiseAbs().maxCoeff();
  if (final_grad > config.grad_tol)
    throw NumericalError("dual minimization stopped after " + std::to_string(iter) +
                         " iterations with gradient max-norm " + std::to_string(final_grad) +
                         " (tolerance " + std::to_string(config.grad_tol) + ")");

  rd.lambda = lambda_from_coefficients(unstandardize(p, grid.mean, grid.sd));
  rd.poly_min = polynomial_minimum(p, grid.lo, grid.hi);

  const Moments achieved = verify_moments(rd, config);
  double residual = 0.0;
  for (Index l = 1; l <= order; ++l) {
    const double scale = std::max(std::abs(m[l]), std::pow(grid.sd, double(l)));
    residual = std::max(residual, std::abs(achieved[l] - m[l]) / scale);
  }
  rd.moment_residual = residual;
  if (residual > config.moment_tol)
    throw NumericalError("realized moments deviate by " + std::to_string(residual) +
                         " (tolerance " + std::to_string(config.moment_tol) + ")");
  return rd;
}

double realized_pdf(const RealizedDensity& rd, double x) {
  const double q = rd.polynomial(x);
  return q > 0.0 ? pdf_eval(rd.reference, x) / q : 0.0;
}

Moments verify_moments(const RealizedDensity& rd, const RealizerConfig& config) {
  const Grid grid = make_grid(rd.reference, config);
  const Index order = 2 * (rd.lambda.rows() - 1);
  const Eigen::VectorXd q = quadratic_form(vandermonde(grid.x, rd.lambda.rows() - 1), rd.lambda);
  const Eigen::VectorXd density = grid.w.cwiseQuotient(q);
  return Moments(Vector<double>(vandermonde(grid.x, order).rightCols(order).transpose() * density));
}

}  // namespace fpsteer
