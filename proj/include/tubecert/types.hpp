#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "tubecert/error.hpp"

namespace tubecert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Axis-aligned box in R^n, stored as an n x 2 matrix of [lo, hi] rows.
struct BoundingBox {
  Matrix bounds;

  BoundingBox() = default;
  explicit BoundingBox(Matrix b) : bounds(std::move(b)) {}

  static BoundingBox cube(int dim, double lo, double hi) {
    Matrix b(dim, 2);
    b.col(0).setConstant(lo);
    b.col(1).setConstant(hi);
    return BoundingBox(std::move(b));
  }

  int dim() const { return static_cast<int>(bounds.rows()); }

  double half_diagonal() const {
    return 0.5 * (bounds.col(1) - bounds.col(0)).norm();
  }

  bool contains(const Vector& x, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x(i) < bounds(i, 0) - slack || x(i) > bounds(i, 1) + slack) return false;
    return true;
  }

  /// A box reaching past this threshold is treated as unbounded (properness
  /// checks then run on nested annuli instead of passing vacuously).
  static constexpr double kUnboundedExtent = 1e6;

  bool unbounded() const {
    return bounds.size() > 0 && (bounds.col(1) - bounds.col(0)).maxCoeff() >= kUnboundedExtent;
  }
};

/// Orthonormal frame at a manifold point: m tangent directions and n - m
/// normal directions. `patch`/`param` record the parametric preimage when
/// the frame came from a chart.
struct TangentFrame {
  Vector base_point;
  Matrix tangent_basis;  // n x m, orthonormal columns
  Matrix normal_basis;   // n x (n - m), orthonormal columns
  int patch = -1;
  Vector param;

  int ambient_dim() const { return static_cast<int>(base_point.size()); }
  int intrinsic_dim() const { return static_cast<int>(tangent_basis.cols()); }
};

/// Frame invariants: orthonormal bases, mutually orthogonal, jointly spanning.
inline bool frame_consistent(const TangentFrame& f, double ortho_tol = 1e-10,
                             double span_tol = 1e-8) {
  const int n = f.ambient_dim();
  const int m = f.intrinsic_dim();
  if (f.normal_basis.cols() != n - m) return false;
  Matrix combined(n, n);
  combined.leftCols(m) = f.tangent_basis;
  combined.rightCols(n - m) = f.normal_basis;
  Matrix gram = combined.transpose() * combined;
  if ((gram - Matrix::Identity(n, n)).lpNorm<Eigen::Infinity>() > ortho_tol) return false;
  return std::abs(std::abs(gram.determinant()) - 1.0) <= span_tol;
}

/// A scalar function of an ambient point. When positivity is declared, every
/// evaluation is checked and a non-positive value raises NonPositiveField.
struct ScalarField {
  std::function<double(const Vector&)> evaluator;
  bool positivity_declared = false;

  double operator()(const Vector& x) const {
    double v = evaluator(x);
    if (positivity_declared && !(v > 0.0))
      throw Error(ErrorCode::NonPositiveField, "scalar-field",
                  "declared-positive field evaluated to " + std::to_string(v));
    return v;
  }
};

inline ScalarField constant_field(double value, bool positive = true) {
  return ScalarField{[value](const Vector&) { return value; }, positive};
}

}  // namespace tubecert
