#ifndef FPSTEER_MOMENT_ALGEBRA_HPP
#define FPSTEER_MOMENT_ALGEBRA_HPP

// Arithmetic on truncated raw power-moment sequences of scalar random
// variables. All routines are templated on the scalar type and operate on
// Eigen column vectors; m_0 = 1 is implicit and never stored.

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "fpsteer/errors.hpp"

namespace fpsteer {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raw moments (m_1, ..., m_L) of a scalar random variable.
template <typename Scalar>
class MomentSequence {
 public:
  MomentSequence() = default;

  explicit MomentSequence(Vector<Scalar> values) : values_(std::move(values)) {
    if (values_.size() < 1) throw DomainError("moment sequence must have order >= 1");
    for (Index i = 0; i < values_.size(); ++i) {
      using std::isfinite;
      if (!isfinite(values_[i]))
        throw DomainError("moment m_" + std::to_string(i + 1) + " is not finite");
    }
  }

  MomentSequence(std::initializer_list<Scalar> values)
      : MomentSequence(Vector<Scalar>(Eigen::Map<const Vector<Scalar>>(
            values.begin(), static_cast<Index>(values.size())))) {}

  static MomentSequence zeros(Index order) {
    return MomentSequence(Vector<Scalar>::Zero(order));
  }

  static MomentSequence from_std(const std::vector<Scalar>& values) {
    return MomentSequence(Vector<Scalar>(
        Eigen::Map<const Vector<Scalar>>(values.data(), static_cast<Index>(values.size()))));
  }

  Index order() const { return values_.size(); }

  /// n such that order() == 2n. Only meaningful for even orders.
  Index half_order() const { return values_.size() / 2; }

  /// Raw moment of order l in 0..order(); l == 0 yields 1.
  Scalar operator[](Index l) const { return l == 0 ? Scalar(1) : values_[l - 1]; }

  const Vector<Scalar>& values() const { return values_; }

  /// (1, m_1, ..., m_L).
  Vector<Scalar> with_zeroth() const {
    Vector<Scalar> out(values_.size() + 1);
    out[0] = Scalar(1);
    out.tail(values_.size()) = values_;
    return out;
  }

  std::vector<Scalar> to_std() const { return {values_.data(), values_.data() + values_.size()}; }

  friend bool operator==(const MomentSequence& lhs, const MomentSequence& rhs) {
    return lhs.values_.size() == rhs.values_.size() && lhs.values_ == rhs.values_;
  }

 private:
  Vector<Scalar> values_;
};

using Moments = MomentSequence<double>;

/// Symmetric (n+1)x(n+1) moment matrix with entry (i, j) = m_{i+j}.
template <typename Scalar>
class HankelMatrix {
 public:
  explicit HankelMatrix(Matrix<Scalar> entries) : entries_(std::move(entries)) {}

  Index dim() const { return entries_.rows(); }
  const Matrix<Scalar>& matrix() const { return entries_; }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Matrix<Scalar> entries_;
};

/// Row l of Pascal's triangle, C(l, 0..l).
template <typename Scalar>
Vector<Scalar> binomial_row(Index l) {
  Vector<Scalar> row = Vector<Scalar>::Zero(l + 1);
  row[0] = Scalar(1);
  for (Index k = 1; k <= l; ++k)
    for (Index i = k; i > 0; --i) row[i] += row[i - 1];
  return row;
}

/// Moments of N(0, variance): odd entries vanish, m_{2l} = variance^l (2l-1)!!.
template <typename Scalar>
MomentSequence<Scalar> gaussian_noise_moments(Scalar variance, Index order) {
  if (!(variance > Scalar(0))) throw DomainError("noise variance must be positive");
  if (order < 2 || order % 2 != 0) throw DomainError("noise moment order must be even and >= 2");
  Vector<Scalar> m = Vector<Scalar>::Zero(order);
  Scalar even = Scalar(1);
  for (Index l = 2; l <= order; l += 2) {
    even *= variance * Scalar(l - 1);
    m[l - 1] = even;
  }
  return MomentSequence<Scalar>(std::move(m));
}

/// Moments of X + Y for independent X and Y.
template <typename Scalar>
MomentSequence<Scalar> moments_of_independent_sum(const MomentSequence<Scalar>& x,
                                                  const MomentSequence<Scalar>& y) {
  if (x.order() != y.order()) throw DomainError("moment order mismatch in independent sum");
  const Index order = x.order();
  Vector<Scalar> out(order);
  for (Index l = 1; l <= order; ++l) {
    const Vector<Scalar> c = binomial_row<Scalar>(l);
    Scalar acc = Scalar(0);
    for (Index i = 0; i <= l; ++i) acc += c[i] * x[i] * y[l - i];
    out[l - 1] = acc;
  }
  return MomentSequence<Scalar>(std::move(out));
}

/// Moments of s X.
template <typename Scalar>
MomentSequence<Scalar> moments_of_scaled(const MomentSequence<Scalar>& x, Scalar s) {
  Vector<Scalar> out(x.order());
  Scalar power = Scalar(1);
  for (Index l = 1; l <= x.order(); ++l) {
    power *= s;
    out[l - 1] = power * x[l];
  }
  return MomentSequence<Scalar>(std::move(out));
}

/// Inverse of S = moments(b F + W) for F: triangular back-substitution.
/// The result need not be a valid moment sequence; callers check is_psd.
template <typename Scalar>
MomentSequence<Scalar> deconvolve_moments(const MomentSequence<Scalar>& s, Scalar b,
                                          const MomentSequence<Scalar>& w) {
  if (s.order() != w.order()) throw DomainError("moment order mismatch in deconvolution");
  if (b == Scalar(0)) throw DomainError("deconvolution gain b must be nonzero");
  const Index order = s.order();
  Vector<Scalar> f(order + 1);
  f[0] = Scalar(1);
  Vector<Scalar> bpow(order + 1);
  bpow[0] = Scalar(1);
  for (Index l = 1; l <= order; ++l) bpow[l] = bpow[l - 1] * b;
  for (Index l = 1; l <= order; ++l) {
    const Vector<Scalar> c = binomial_row<Scalar>(l);
    Scalar acc = s[l];
    for (Index i = 0; i < l; ++i) acc -= c[i] * bpow[i] * f[i] * w[l - i];
    f[l] = acc / bpow[l];
  }
  return MomentSequence<Scalar>(Vector<Scalar>(f.tail(order)));
}

template <typename Scalar>
HankelMatrix<Scalar> hankel_from_moments(const MomentSequence<Scalar>& m) {
  if (m.order() % 2 != 0) throw DomainError("Hankel matrix needs an even moment order");
  const Index dim = m.half_order() + 1;
  Matrix<Scalar> h(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) h(i, j) = m[i + j];
  return HankelMatrix<Scalar>(std::move(h));
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// True iff lambda_min >= -tol (1 + max |lambda|).
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& h, typename Derived::Scalar tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(h, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return ev.minCoeff() >= -tol * (Scalar(1) + ev.cwiseAbs().maxCoeff());
}

template <typename Scalar>
bool is_psd(const HankelMatrix<Scalar>& h, Scalar tol = Scalar(1e-9)) {
  return is_psd(h.matrix(), tol);
}

/// Central moments E[(x - m_1)^l], l = 1..L, derived on demand.
template <typename Scalar>
Vector<Scalar> central_moments(const MomentSequence<Scalar>& m) {
  const MomentSequence<Scalar> unit_mass(Vector<Scalar>::Constant(m.order(), Scalar(1)));
  return moments_of_independent_sum(m, moments_of_scaled(unit_mass, -m[1])).values();
}

}  // namespace fpsteer

#endif  // FPSTEER_MOMENT_ALGEBRA_HPP
