#ifndef FPSTEER_REALIZER_HPP
#define FPSTEER_REALIZER_HPP

// Density realization from a truncated moment sequence: among all densities
// with the prescribed moments, p = r / (G' L G) minimizes KL(r || p), where
// G(x) = (1, x, ..., x^n) and L minimizes the convex dual
//
//   J_r(L) = tr(L H) - \int r(x) log(G(x)' L G(x)) dx
//
// over matrices whose quadratic form G' L G is positive on the real line.

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "fpsteer/distribution.hpp"
#include "fpsteer/moment_algebra.hpp"

namespace fpsteer {

/// How default_reference reads E[F^2]: as the second raw moment minus the
/// squared mean (central), or literally as the Gaussian's variance.
enum class ReferenceVariance { central, raw_second_moment };

enum class RealizerOptimizer { newton, gradient };

struct RealizerConfig {
  int nodes = 4001;         // odd, composite Simpson
  double half_width = 12.0; // in reference standard deviations
  int max_iters = 200;
  double grad_tol = 1e-8;
  double backtrack = 0.5;
  double moment_tol = 1e-6;
  int max_widenings = 8;    // reference variance doublings tried by realize_adaptive
  ReferenceVariance reference_variance = ReferenceVariance::central;
  RealizerOptimizer optimizer = RealizerOptimizer::newton;

  void validate() const;
};

struct RealizedDensity {
  DensitySpec reference;
  Eigen::MatrixXd lambda;        // (n+1)x(n+1), monomial basis in x
  Moments target_moments;
  double poly_min = 0.0;         // inf over R of G' L G
  double moment_residual = 0.0;  // max scaled moment error of p
  int iterations = 0;
  std::vector<double> objective_trace;  // accepted iterates, standardized coordinates

  /// G(x)' L G(x).
  double polynomial(double x) const;
};

/// Reference mean and standard deviation, which anchor the quadrature window.
std::pair<double, double> reference_location_scale(const DensitySpec& r);

double objective_jr(const Eigen::MatrixXd& lambda, const HankelMatrix<double>& h,
                    const DensitySpec& r, const RealizerConfig& config = {});

/// H - \int r G G' / (G' L G); symmetric by construction.
Eigen::MatrixXd gradient_jr(const Eigen::MatrixXd& lambda, const HankelMatrix<double>& h,
                            const DensitySpec& r, const RealizerConfig& config = {});

/// Requires a positive definite Hankel matrix of m. Throws DomainError on a
/// boundary sequence and NumericalError if the dual does not converge.
RealizedDensity realize(const Moments& m, const DensitySpec& r, const RealizerConfig& config = {});

/// Two-component Gaussian mixture fitted to f by least squares on the
/// standardized moments, component variances then scaled by inflation.
/// Needs order >= 4. Throws NumericalError if the fit is poor.
DensitySpec moment_fitted_reference(const Moments& f, double inflation = 1.5);

/// r / q has lighter tails than r, so a kernel more leptokurtic than its
/// default reference can leave the dual minimum on the cone boundary. Tries
/// the default reference, then its variance doubled up to max_widenings
/// times, then moment_fitted_reference at inflations 1.5 and 2. Rethrows the
/// first failure when every reference fails.
RealizedDensity realize_adaptive(const Moments& m, const RealizerConfig& config = {});

double realized_pdf(const RealizedDensity& rd, double x);

/// Moments of the realized density by quadrature on the realizer grid.
Moments verify_moments(const RealizedDensity& rd, const RealizerConfig& config = {});

/// Gaussian matching the first two moments of f.
DensitySpec default_reference(const Moments& f,
                              ReferenceVariance variance = ReferenceVariance::central);

/// Global minimum over R of sum_k coeffs[k] x^k, from the real critical
/// points (companion-matrix eigenvalues) and a dense scan of [scan_lo, scan_hi].
double polynomial_minimum(const Eigen::VectorXd& coeffs, double scan_lo, double scan_hi);

inline constexpr double kMinAcceptanceRate = 1e-4;

/// Exact draw from p by rejection against r: accept x ~ r with probability
/// poly_min / (G' L G)(x), so the long-run acceptance rate is poly_min.
template <typename Urbg>
double sample_realized(const RealizedDensity& rd, Urbg& rng) {
  if (!(rd.poly_min >= kMinAcceptanceRate))
    throw NumericalError("realized density acceptance rate " + std::to_string(rd.poly_min) +
                         " is below " + std::to_string(kMinAcceptanceRate));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 100'000'000; ++attempt) {
    const double x = sample(rd.reference, rng);
    if (unit(rng) * rd.polynomial(x) <= rd.poly_min) return x;
  }
  throw NumericalError("rejection sampler exhausted its attempt budget");
}

}  // namespace fpsteer

#endif  // FPSTEER_REALIZER_HPP
