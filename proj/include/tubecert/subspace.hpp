#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tubecert/error.hpp"
#include "tubecert/types.hpp"

namespace tubecert {

/// A linear subspace of R^n carried by an orthonormal basis (n x m columns).
struct Subspace {
  Matrix basis;

  Subspace() = default;
  explicit Subspace(Matrix b, double ortho_tol = 1e-10) : basis(std::move(b)) {
    if (basis.cols() > basis.rows())
      throw Error(ErrorCode::DimensionMismatch, "subspace-metrics", "dim exceeds ambient dim");
    Matrix gram = basis.transpose() * basis;
    if ((gram - Matrix::Identity(basis.cols(), basis.cols())).lpNorm<Eigen::Infinity>() >
        ortho_tol)
      throw Error(ErrorCode::InvalidScenario, "subspace-metrics", "basis is not orthonormal");
  }

  /// Orthonormalizes an arbitrary spanning set via thin QR.
  static Subspace from_span(const Matrix& span) {
    Eigen::HouseholderQR<Matrix> qr(span);
    Matrix q = qr.householderQ() * Matrix::Identity(span.rows(), span.cols());
    return Subspace(std::move(q));
  }

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
};

/// sup over unit a in P of the distance from a to Q, i.e. the largest
/// singular value of (I - Q Q^T) P. Equals the sine of the largest principal
/// angle when dim P = dim Q, and is well defined one-sidedly otherwise.
template <typename DerivedP, typename DerivedQ>
double rho_basis(const Eigen::MatrixBase<DerivedP>& p_basis,
                 const Eigen::MatrixBase<DerivedQ>& q_basis) {
  if (p_basis.rows() != q_basis.rows())
    throw Error(ErrorCode::DimensionMismatch, "subspace-metrics",
                "ambient dimensions disagree");
  if (p_basis.cols() == 0) return 0.0;
  Matrix rejected = p_basis - q_basis * (q_basis.transpose() * p_basis);
  Eigen::JacobiSVD<Matrix> svd(rejected);
  return svd.singularValues()(0);
}

inline double rho(const Subspace& p, const Subspace& q) { return rho_basis(p.basis, q.basis); }

/// Principal angles from the SVD of the cross-Gram matrix, nondecreasing.
template <typename DerivedP, typename DerivedQ>
std::vector<double> principal_angles_basis(const Eigen::MatrixBase<DerivedP>& p_basis,
                                           const Eigen::MatrixBase<DerivedQ>& q_basis) {
  if (p_basis.rows() != q_basis.rows())
    throw Error(ErrorCode::DimensionMismatch, "subspace-metrics",
                "ambient dimensions disagree");
  Matrix gram = p_basis.transpose() * q_basis;
  Eigen::JacobiSVD<Matrix> svd(gram);
  const auto& sv = svd.singularValues();
  std::vector<double> angles(static_cast<std::size_t>(sv.size()));
  for (Index i = 0; i < sv.size(); ++i)
    angles[static_cast<std::size_t>(i)] = std::acos(std::clamp(sv(i), 0.0, 1.0));
  std::sort(angles.begin(), angles.end());
  return angles;
}

inline std::vector<double> principal_angles(const Subspace& p, const Subspace& q) {
  return principal_angles_basis(p.basis, q.basis);
}

}  // namespace tubecert
