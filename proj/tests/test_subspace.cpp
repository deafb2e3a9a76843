#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tubecert/rng.hpp"
#include "tubecert/subspace.hpp"

using namespace tubecert;

namespace {

Subspace random_subspace(CounterRng& rng, int n, int m) {
  Matrix g(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = rng.normal();
  return Subspace::from_span(g);
}

Subspace line(double theta) {
  Matrix b(2, 1);
  b << std::cos(theta), std::sin(theta);
  return Subspace(b);
}

}  // namespace

TEST_SUITE("subspace") {

TEST_CASE("rho on lines") {
  Matrix e1(2, 1), e2(2, 1);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(rho(Subspace(e1), Subspace(e1)) < 1e-12);
  CHECK(rho(Subspace(e1), Subspace(e2)) == doctest::Approx(1.0).epsilon(1e-12));
  // Rotation by pi/6: distance is sin(pi/6) = 0.5.
  const double got = rho(Subspace(e1), line(M_PI / 6.0));
  CHECK(got == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(got - support::rho_grid_oracle(e1, line(M_PI / 6.0).basis)) < 1e-6);
}

TEST_CASE("rho dimension mismatch") {
  Matrix a(2, 1), b(3, 1);
  a << 1, 0;
  b << 1, 0, 0;
  CHECK_THROWS_AS(rho(Subspace(a), Subspace(b)), Error);
}

TEST_CASE("principal angles: identical, planted, orthogonal") {
  CounterRng rng(21);
  Subspace p = random_subspace(rng, 5, 2);
  auto zero = principal_angles(p, p);
  for (double a : zero) CHECK(a < 1e-7);

  // Planted rotation by theta inside an orthogonal coordinate pair.
  const double theta = 0.7;
  Matrix q = p.basis;
  Vector extra = Vector::Zero(5);
  {
    // Build a direction orthogonal to span(p) to rotate the last column into.
    CounterRng r2(99);
    Vector g(5);
    for (int i = 0; i < 5; ++i) g(i) = r2.normal();
    g -= p.basis * (p.basis.transpose() * g);
    extra = g.normalized();
  }
  q.col(1) = std::cos(theta) * p.basis.col(1) + std::sin(theta) * extra;
  auto angles = principal_angles(p, Subspace(q));
  REQUIRE(angles.size() == 2);
  CHECK(angles[0] < 1e-7);
  CHECK(angles[1] == doctest::Approx(theta).epsilon(1e-8));
  CHECK(rho(p, Subspace(q)) == doctest::Approx(std::sin(theta)).epsilon(1e-8));

  // Orthogonal complements of equal dimension in R^4: all angles pi/2.
  Matrix a(4, 2), b(4, 2);
  a << 1, 0, 0, 1, 0, 0, 0, 0;
  b << 0, 0, 0, 0, 1, 0, 0, 1;
  for (double ang : principal_angles(Subspace(a), Subspace(b)))
    CHECK(ang == doctest::Approx(M_PI / 2.0));
  CHECK(rho(Subspace(a), Subspace(b)) == doctest::Approx(1.0));
}

TEST_CASE("metric properties on random equal-dim subspaces") {
  CounterRng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.next() % 2);
    Subspace p = random_subspace(rng, 5, m);
    Subspace q = random_subspace(rng, 5, m);
    Subspace r = random_subspace(rng, 5, m);
    CHECK(rho(p, p) < 1e-12);
    CHECK(std::abs(rho(p, q) - rho(q, p)) < 1e-10);
    CHECK(rho(p, r) <= rho(p, q) + rho(q, r) + 1e-10);
    // sin of largest principal angle agrees.
    auto angles = principal_angles(p, q);
    CHECK(std::abs(rho(p, q) - std::sin(angles.back())) < 1e-6);
  }
}

TEST_CASE("grid oracle agreement for lines and planes") {
  CounterRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + (trial % 2);
    Subspace p = random_subspace(rng, 4, m);
    Subspace q = random_subspace(rng, 4, m);
    const double svd_value = rho(p, q);
    const double grid_value = support::rho_grid_oracle(p.basis, q.basis);
    CHECK(std::abs(svd_value - grid_value) < 1e-6);
  }
}

TEST_CASE("one-sided rho for unequal dimensions") {
  // A line inside a plane has distance 0 to the plane; the plane has
  // positive distance to the line.
  Matrix plane(3, 2), inner(3, 1);
  plane << 1, 0, 0, 1, 0, 0;
  inner << 1, 0, 0;
  CHECK(rho(Subspace(inner), Subspace(plane)) < 1e-12);
  CHECK(rho(Subspace(plane), Subspace(inner)) == doctest::Approx(1.0));
}

}  // TEST_SUITE
