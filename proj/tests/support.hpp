#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here is deliberately implementation-independent: brute-force subspace
// distances, finite-difference gradients, union-find components, and the
// closed-form radial projector for spheres.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tubecert/expression.hpp"
#include "tubecert/manifold.hpp"
#include "tubecert/types.hpp"

namespace support {

using tubecert::BoundingBox;
using tubecert::Expression;
using tubecert::ManifoldSpec;
using tubecert::Matrix;
using tubecert::Vector;

inline Expression expr(const std::string& text, int ambient_dim) {
  return Expression::parse(text, tubecert::ambient_variables(ambient_dim));
}

inline Expression pexpr(const std::string& text, int intrinsic_dim) {
  return Expression::parse(text, tubecert::parameter_variables(intrinsic_dim));
}

inline std::shared_ptr<ManifoldSpec> circle_implicit(double radius = 1.0, double cx = 0.0,
                                                     double cy = 0.0) {
  tubecert::ImplicitRep rep;
  const std::string r2 = std::to_string(radius * radius);
  rep.constraints.push_back(expr("(x - " + std::to_string(cx) + ")^2 + (y - " +
                                     std::to_string(cy) + ")^2 - " + r2,
                                 2));
  BoundingBox box = BoundingBox::cube(2, -2.0 * radius, 2.0 * radius);
  box.bounds.col(0) += Eigen::Vector2d(cx, cy);
  box.bounds.col(1) += Eigen::Vector2d(cx, cy);
  return std::make_shared<ManifoldSpec>(2, 1, std::move(rep), std::move(box));
}

inline std::shared_ptr<ManifoldSpec> sphere_implicit(int n) {
  tubecert::ImplicitRep rep;
  std::string sum;
  for (int i = 0; i < n; ++i) {
    if (i) sum += " + ";
    sum += "x" + std::to_string(i + 1) + "^2";
  }
  rep.constraints.push_back(expr(sum + " - 1", n));
  return std::make_shared<ManifoldSpec>(n, n - 1, std::move(rep),
                                        BoundingBox::cube(n, -1.6, 1.6));
}

inline std::shared_ptr<ManifoldSpec> torus_implicit() {
  tubecert::ImplicitRep rep;
  rep.constraints.push_back(expr("(sqrt(x^2 + y^2) - 2)^2 + z^2 - 1", 3));
  Matrix b(3, 2);
  b << -3.5, 3.5, -3.5, 3.5, -1.5, 1.5;
  return std::make_shared<ManifoldSpec>(3, 2, std::move(rep), BoundingBox(std::move(b)));
}

inline std::shared_ptr<ManifoldSpec> circle_parametric(double radius = 1.0) {
  tubecert::ParametricPatch patch;
  Matrix dom(1, 2);
  dom << 0.0, 2.0 * M_PI;
  patch.domain = BoundingBox(dom);
  patch.periodic = {true};
  const std::string r = std::to_string(radius);
  patch.map.push_back(pexpr(r + " * cos(u)", 1));
  patch.map.push_back(pexpr(r + " * sin(u)", 1));
  tubecert::ParametricRep rep;
  rep.patches.push_back(std::move(patch));
  return std::make_shared<ManifoldSpec>(2, 1, std::move(rep),
                                        BoundingBox::cube(2, -2.0 * radius, 2.0 * radius));
}

/// (1 + a cos(k u)) (cos u, sin u)
inline std::shared_ptr<ManifoldSpec> wobble_circle(double a, int k) {
  tubecert::ParametricPatch patch;
  Matrix dom(1, 2);
  dom << 0.0, 2.0 * M_PI;
  patch.domain = BoundingBox(dom);
  patch.periodic = {true};
  const std::string rho =
      "(1 + " + std::to_string(a) + " * cos(" + std::to_string(k) + " * u))";
  patch.map.push_back(pexpr(rho + " * cos(u)", 1));
  patch.map.push_back(pexpr(rho + " * sin(u)", 1));
  tubecert::ParametricRep rep;
  rep.patches.push_back(std::move(patch));
  return std::make_shared<ManifoldSpec>(2, 1, std::move(rep), BoundingBox::cube(2, -2.0, 2.0));
}

/// x-axis segment in R^2, non-periodic chart.
inline std::shared_ptr<ManifoldSpec> line_parametric(double lo = -5.0, double hi = 5.0) {
  tubecert::ParametricPatch patch;
  Matrix dom(1, 2);
  dom << lo, hi;
  patch.domain = BoundingBox(dom);
  patch.periodic = {false};
  patch.map.push_back(pexpr("u", 1));
  patch.map.push_back(pexpr("0", 1));
  tubecert::ParametricRep rep;
  rep.patches.push_back(std::move(patch));
  Matrix b(2, 2);
  b << lo, hi, -1.5, 1.5;
  return std::make_shared<ManifoldSpec>(2, 1, std::move(rep), BoundingBox(std::move(b)));
}

/// Two horizontal lines y = +-d, two charts.
inline std::shared_ptr<ManifoldSpec> parallel_lines(double d) {
  tubecert::ParametricRep rep;
  for (double sign : {1.0, -1.0}) {
    tubecert::ParametricPatch patch;
    Matrix dom(1, 2);
    dom << -4.0, 4.0;
    patch.domain = BoundingBox(dom);
    patch.periodic = {false};
    patch.map.push_back(pexpr("u", 1));
    patch.map.push_back(pexpr(std::to_string(sign * d), 1));
    rep.patches.push_back(std::move(patch));
  }
  Matrix b(2, 2);
  b << -4.0, 4.0, -2.0 * d - 1.0, 2.0 * d + 1.0;
  return std::make_shared<ManifoldSpec>(2, 1, std::move(rep), BoundingBox(std::move(b)));
}

// ---------------------------------------------------------------------------
// Oracles

/// Central-difference gradient of a scalar function, independent of the
/// library's differentiation helpers.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

/// Union-find partition of points under |x_i - x_j| < radius.
inline std::vector<int> union_find_components(const std::vector<Vector>& pts, double radius) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((pts[i] - pts[j]).norm() < radius) parent[find(i)] = find(j);
  std::vector<int> root(n), relabel;
  std::map<int, int> dense;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (!dense.count(r)) dense[r] = static_cast<int>(dense.size());
    root[i] = dense[r];
  }
  (void)relabel;
  return root;
}

/// Brute-force sup over sampled unit a in P of inf over b in Q of |a - b|;
/// the inner infimum over the linear space Q is the orthogonal rejection.
inline double rho_grid_oracle(const Matrix& p_basis, const Matrix& q_basis, int grid = 10000) {
  const auto reject = [&](const Vector& a) {
    return (a - q_basis * (q_basis.transpose() * a)).norm();
  };
  if (p_basis.cols() == 1) return reject(p_basis.col(0));
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double alpha = 2.0 * M_PI * i / grid;
    Vector a = std::cos(alpha) * p_basis.col(0) + std::sin(alpha) * p_basis.col(1);
    best = std::max(best, reject(a));
  }
  return best;
}

/// Closed-form radial projector on the unit sphere: r(x) = x/|x|,
/// d_x r = (I - xhat xhat^T)/|x|.
inline Matrix radial_projector_derivative(const Vector& x) {
  const double r = x.norm();
  const Vector xhat = x / r;
  return (Matrix::Identity(x.size(), x.size()) - xhat * xhat.transpose()) / r;
}

}  // namespace support
