#include <algorithm>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "tubecert/manifold.hpp"
#include "tubecert/subspace.hpp"

using namespace tubecert;

TEST_SUITE("manifold") {

TEST_CASE("circle tangent space at axis point") {
  auto m = support::circle_implicit();
  Vector x(2);
  x << 1.0, 0.0;
  TangentFrame f = tangent_space(*m, x);
  CHECK(frame_consistent(f));
  Vector e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  CHECK(rho_basis(f.tangent_basis, e2) < 1e-8);
  CHECK(rho_basis(f.normal_basis, e1) < 1e-8);
}

TEST_CASE("sphere tangent space at the pole") {
  auto m = support::sphere_implicit(3);
  Vector x(3);
  x << 0.0, 0.0, 1.0;
  TangentFrame f = tangent_space(*m, x);
  Matrix horizontal(3, 2);
  horizontal << 1, 0, 0, 1, 0, 0;
  Vector e3(3);
  e3 << 0, 0, 1;
  CHECK(rho_basis(f.tangent_basis, horizontal) < 1e-8);
  CHECK(rho_basis(f.normal_basis, e3) < 1e-8);
}

TEST_CASE("torus normal at outer equator agrees with the gradient oracle") {
  auto m = support::torus_implicit();
  Vector x(3);
  x << 3.0, 0.0, 0.0;
  TangentFrame f = tangent_space(*m, x);
  // Oracle: finite-difference gradient of F spans the normal space.
  Vector grad = support::fd_gradient(
      [&](const Vector& p) { return m->constraint_value(p)(0); }, x);
  grad.normalize();
  CHECK(rho_basis(f.normal_basis, grad) < 1e-6);
  Vector e1(3);
  e1 << 1, 0, 0;
  CHECK(rho_basis(f.normal_basis, e1) < 1e-6);
}

TEST_CASE("tangent space errors") {
  auto m = support::circle_implicit();
  Vector off(2);
  off << 1.5, 0.0;
  CHECK_THROWS_AS(tangent_space(*m, off), Error);
  try {
    tangent_space(*m, off);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOnManifold);
  }
}

TEST_CASE("dual-route tangent reconstruction: SVD kernel vs Gram-Schmidt") {
  auto m = support::torus_implicit();
  auto frames = sample(*m, 40, 11);
  for (const auto& f : frames) {
    // Oracle route: Gram-Schmidt the constraint gradients, then complete.
    Matrix jac = m->constraint_jacobian(f.base_point);
    Matrix rows = jac.transpose();  // n x (n-m) gradient columns
    Eigen::HouseholderQR<Matrix> qr(rows);
    Matrix q = qr.householderQ();
    Matrix normal_gs = q.leftCols(rows.cols());
    Matrix tangent_gs = q.rightCols(jac.cols() - rows.cols());
    CHECK(rho_basis(f.tangent_basis, tangent_gs) < 1e-8);
    CHECK(rho_basis(f.normal_basis, normal_gs) < 1e-8);
  }
}

TEST_CASE("parametric and implicit circles agree at matched points") {
  auto mi = support::circle_implicit();
  auto mp = support::circle_parametric();
  for (double theta : {0.1, 1.3, 2.9, 4.2, 5.8}) {
    Vector x(2);
    x << std::cos(theta), std::sin(theta);
    TangentFrame fi = tangent_space(*mi, x);
    TangentFrame fp = tangent_space(*mp, x);
    CHECK(rho_basis(fi.tangent_basis, fp.tangent_basis) < 1e-8);
  }
}

TEST_CASE("sampling: sphere membership, determinism, budget") {
  auto m = support::sphere_implicit(3);
  auto frames = sample(*m, 100, 7);
  REQUIRE(frames.size() == 100);
  for (const auto& f : frames) {
    CHECK(std::abs(f.base_point.norm() - 1.0) < 1e-9);
    CHECK(frame_consistent(f));
  }
  auto again = sample(*m, 100, 7);
  for (std::size_t i = 0; i < frames.size(); ++i)
    CHECK((frames[i].base_point - again[i].base_point).norm() == 0.0);
  auto other = sample(*m, 100, 8);
  bool any_diff = false;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if ((frames[i].base_point - other[i].base_point).norm() > 0) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("sampling covers every chart") {
  auto m = support::parallel_lines(5.0);
  auto frames = sample(*m, 50, 3);
  REQUIRE(frames.size() == 50);
  std::set<int> patches;
  for (const auto& f : frames) patches.insert(f.patch);
  CHECK(patches == std::set<int>{0, 1});
}

TEST_CASE("connected components against the union-find oracle") {
  auto one = support::circle_implicit();
  auto frames = sample(*one, 60, 5);
  auto part = connected_components(frames, 0.5);
  CHECK(part.count == 1);

  // Two circles centered (+-5, 0). Enough samples that intra-circle arc gaps
  // stay below the linking radius.
  auto left = support::circle_implicit(1.0, -5.0, 0.0);
  auto right = support::circle_implicit(1.0, 5.0, 0.0);
  auto fl = sample(*left, 150, 5);
  auto fr = sample(*right, 150, 5);
  std::vector<TangentFrame> both = fl;
  both.insert(both.end(), fr.begin(), fr.end());
  auto part2 = connected_components(both, 0.5);
  CHECK(part2.count == 2);

  std::vector<Vector> pts;
  for (const auto& f : both) pts.push_back(f.base_point);
  auto oracle = support::union_find_components(pts, 0.5);
  CHECK(*std::max_element(oracle.begin(), oracle.end()) + 1 == part2.count);
  // Same partition: equal labels iff oracle labels equal.
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK((part2.label[i] == part2.label[j]) == (oracle[i] == oracle[j]));

  CHECK(connected_components({}, 0.5).count == 0);
}

TEST_CASE("connected components are permutation invariant") {
  auto left = support::circle_implicit(1.0, -5.0, 0.0);
  auto right = support::circle_implicit(1.0, 5.0, 0.0);
  auto fl = sample(*left, 60, 9);
  auto fr = sample(*right, 60, 9);
  std::vector<TangentFrame> ab = fl, ba = fr;
  ab.insert(ab.end(), fr.begin(), fr.end());
  ba.insert(ba.end(), fl.begin(), fl.end());
  auto pa = connected_components(ab, 1.5);
  auto pb = connected_components(ba, 1.5);
  CHECK(pa.count == pb.count);
  // frame i of ab corresponds to frame (i + 60) % 120 of ba
  for (int i = 0; i < 120; ++i)
    for (int j = 0; j < 120; ++j)
      CHECK((pa.label[i] == pa.label[j]) ==
            (pb.label[(i + 60) % 120] == pb.label[(j + 60) % 120]));
}

TEST_CASE("sampled representation round-trips frames") {
  auto src = support::circle_implicit();
  auto frames = sample(*src, 80, 13);
  auto m = std::make_shared<ManifoldSpec>(2, 1, SampledRep{frames},
                                          BoundingBox::cube(2, -2, 2));
  auto sub = sample(*m, 30, 1);
  CHECK(sub.size() == 30);
  for (const auto& f : sub) CHECK(on_manifold(*m, f.base_point));
  TangentFrame f0 = tangent_space(*m, frames[0].base_point);
  CHECK((f0.base_point - frames[0].base_point).norm() == 0.0);
}

TEST_CASE("scalar field positivity is asserted") {
  ScalarField f = constant_field(-1.0, true);
  Vector x(1);
  x << 0.0;
  CHECK_THROWS_AS(f(x), Error);
  ScalarField ok = constant_field(0.5, true);
  CHECK(ok(x) == doctest::Approx(0.5));
}

}  // TEST_SUITE
