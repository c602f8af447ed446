#ifndef FPSTEER_QUADRATURE_HPP
#define FPSTEER_QUADRATURE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "fpsteer/errors.hpp"

namespace fpsteer {

/// Composite Simpson rule for a vector-valued integrand on [lo, hi], halving
/// the panel width until successive estimates differ by less than
/// rel_tol times the integral of |f| in every component.
template <typename Integrand>
Eigen::VectorXd adaptive_simpson(Integrand&& f, double lo, double hi, double rel_tol = 1e-9,
                                 int initial_panels = 256, int max_doublings = 16) {
  int panels = initial_panels;
  double h = (hi - lo) / panels;

  Eigen::VectorXd ends = f(lo) + f(hi);
  Eigen::VectorXd ends_abs = f(lo).cwiseAbs() + f(hi).cwiseAbs();
  Eigen::VectorXd odd = Eigen::VectorXd::Zero(ends.size());
  Eigen::VectorXd even = odd, odd_abs = odd, even_abs = odd;
  for (int i = 1; i < panels; ++i) {
    const Eigen::VectorXd v = f(lo + i * h);
    (i % 2 ? odd : even) += v;
    (i % 2 ? odd_abs : even_abs) += v.cwiseAbs();
  }
  Eigen::VectorXd estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);

  double worst = 0.0;
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    h *= 0.5;
    even += odd;
    even_abs += odd_abs;
    odd.setZero();
    odd_abs.setZero();
    for (int i = 1; i < panels; i += 2) {
      const Eigen::VectorXd v = f(lo + i * h);
      odd += v;
      odd_abs += v.cwiseAbs();
    }
    const Eigen::VectorXd refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    const Eigen::VectorXd scale =
        (h / 3.0 * (ends_abs + 4.0 * odd_abs + 2.0 * even_abs)).cwiseMax(1e-300);
    worst = ((refined - estimate).cwiseAbs().array() / scale.array()).maxCoeff();
    estimate = refined;
    if (worst < rel_tol) return estimate;
  }
  std::ostringstream msg;
  msg << "quadrature did not converge on [" << lo << ", " << hi << "] after " << panels
      << " panels; worst relative change " << worst << " (tolerance " << rel_tol << ")";
  throw NumericalError(msg.str());
}

/// Composite Simpson weights for an odd number of equally spaced nodes.
inline Eigen::VectorXd simpson_weights(Eigen::Index nodes, double h) {
  if (nodes < 3 || nodes % 2 == 0) throw DomainError("Simpson rule needs an odd node count >= 3");
  Eigen::VectorXd w(nodes);
  for (Eigen::Index i = 0; i < nodes; ++i) w[i] = (i % 2 ? 4.0 : 2.0);
  w[0] = w[nodes - 1] = 1.0;
  return w * (h / 3.0);
}

}  // namespace fpsteer

#endif  // FPSTEER_QUADRATURE_HPP
