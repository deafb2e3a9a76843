#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>

namespace tubecert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Step for central differences: cbrt(machine eps) * max(1, |x|).
inline double fd_step(double scale) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, scale);
}

/// Central-difference Jacobian of f: R^n -> R^k at x.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, int codomain_dim) {
  const int n = static_cast<int>(x.size());
  const double h = fd_step(x.norm());
  Matrix jac(codomain_dim, n);
  Vector xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

/// Central-difference directional derivative of f along unit direction u.
inline Vector fd_directional(const std::function<Vector(const Vector&)>& f, const Vector& x,
                             const Vector& u, double step = 0.0) {
  const double h = step > 0.0 ? step : fd_step(x.norm());
  return (f(x + h * u) - f(x - h * u)) / (2.0 * h);
}

/// One Richardson level: combines central differences at h and h/2 into an
/// O(h^4) estimate. `disagreement` reports the max-norm gap between the two
/// levels, the caller's instability signal.
inline Vector fd_directional_richardson(const std::function<Vector(const Vector&)>& f,
                                        const Vector& x, const Vector& u, double h,
                                        double* disagreement = nullptr) {
  const Vector coarse = (f(x + h * u) - f(x - h * u)) / (2.0 * h);
  const Vector fine = (f(x + 0.5 * h * u) - f(x - 0.5 * h * u)) / h;
  if (disagreement != nullptr)
    *disagreement = (coarse - fine).lpNorm<Eigen::Infinity>();
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace tubecert
