#include "tubecert/manifold.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "tubecert/numdiff.hpp"
#include "tubecert/rng.hpp"

namespace tubecert {

namespace {

constexpr const char* kModule = "manifold-core";

Vector eval_map(const std::vector<Expression>& exprs, const Vector& args) {
  Vector out(static_cast<Index>(exprs.size()));
  for (std::size_t i = 0; i < exprs.size(); ++i)
    out(static_cast<Index>(i)) = exprs[i].eval(args);
  return out;
}

Vector with_bound_args(const Vector& x, const Vector& bound) {
  if (bound.size() == 0) return x;
  Vector args(x.size() + bound.size());
  args << x, bound;
  return args;
}

/// Scratch argument buffer [point..., bound...] reused across evaluations.
double* arg_scratch(const Vector& x, const Vector& bound) {
  thread_local std::vector<double> scratch;
  scratch.resize(static_cast<std::size_t>(x.size() + bound.size()));
  for (Index i = 0; i < x.size(); ++i) scratch[static_cast<std::size_t>(i)] = x(i);
  for (Index i = 0; i < bound.size(); ++i)
    scratch[static_cast<std::size_t>(x.size() + i)] = bound(i);
  return scratch.data();
}

void eval_map_into(const std::vector<Expression>& exprs, double* args, int arg_count,
                   Vector& out) {
  for (std::size_t i = 0; i < exprs.size(); ++i)
    out(static_cast<Index>(i)) = exprs[i].eval(args, arg_count);
}

/// Central-difference Jacobian over the leading |x| slots of the scratch
/// buffer; h = cbrt(eps) * max(1, |x|).
void fd_jacobian_into(const std::vector<Expression>& exprs, double* args, int arg_count,
                      int point_dim, double point_norm, Matrix& out) {
  const double h = fd_step(point_norm);
  const int rows = static_cast<int>(exprs.size());
  for (int j = 0; j < point_dim; ++j) {
    const double saved = args[j];
    args[j] = saved + h;
    for (int i = 0; i < rows; ++i) out(i, j) = exprs[static_cast<std::size_t>(i)].eval(args, arg_count);
    args[j] = saved - h;
    for (int i = 0; i < rows; ++i)
      out(i, j) = (out(i, j) - exprs[static_cast<std::size_t>(i)].eval(args, arg_count)) / (2.0 * h);
    args[j] = saved;
  }
}

}  // namespace

ManifoldSpec::ManifoldSpec(int ambient_dim, int intrinsic_dim, ImplicitRep rep, BoundingBox box,
                           SmoothnessClass smoothness)
    : ambient_dim_(ambient_dim),
      intrinsic_dim_(intrinsic_dim),
      kind_(RepresentationKind::Implicit),
      rep_(std::move(rep)),
      box_(std::move(box)),
      smoothness_(smoothness) {
  const auto& r = std::get<ImplicitRep>(rep_);
  if (ambient_dim_ < 1 || intrinsic_dim_ < 0 || intrinsic_dim_ >= ambient_dim_)
    throw Error(ErrorCode::InvalidScenario, kModule, "need n >= 1 and 0 <= m < n");
  if (static_cast<int>(r.constraints.size()) != codim())
    throw Error(ErrorCode::InvalidScenario, kModule,
                "implicit representation needs n - m constraint expressions");
  if (!r.jacobian.empty() && static_cast<int>(r.jacobian.size()) != codim())
    throw Error(ErrorCode::InvalidScenario, kModule, "analytic jacobian has wrong row count");
}

ManifoldSpec::ManifoldSpec(int ambient_dim, int intrinsic_dim, ParametricRep rep, BoundingBox box,
                           SmoothnessClass smoothness)
    : ambient_dim_(ambient_dim),
      intrinsic_dim_(intrinsic_dim),
      kind_(RepresentationKind::Parametric),
      rep_(std::move(rep)),
      box_(std::move(box)),
      smoothness_(smoothness) {
  const auto& r = std::get<ParametricRep>(rep_);
  if (ambient_dim_ < 1 || intrinsic_dim_ < 0 || intrinsic_dim_ >= ambient_dim_)
    throw Error(ErrorCode::InvalidScenario, kModule, "need n >= 1 and 0 <= m < n");
  if (r.patches.empty())
    throw Error(ErrorCode::InvalidScenario, kModule, "parametric representation needs patches");
  for (const auto& p : r.patches) {
    if (static_cast<int>(p.map.size()) != ambient_dim_)
      throw Error(ErrorCode::InvalidScenario, kModule, "patch map has wrong component count");
    if (p.domain.dim() != intrinsic_dim_)
      throw Error(ErrorCode::InvalidScenario, kModule, "patch domain has wrong dimension");
  }
}

ManifoldSpec::ManifoldSpec(int ambient_dim, int intrinsic_dim, SampledRep rep, BoundingBox box,
                           SmoothnessClass smoothness)
    : ambient_dim_(ambient_dim),
      intrinsic_dim_(intrinsic_dim),
      kind_(RepresentationKind::Sampled),
      rep_(std::move(rep)),
      box_(std::move(box)),
      smoothness_(smoothness) {
  const auto& r = std::get<SampledRep>(rep_);
  if (r.frames.empty())
    throw Error(ErrorCode::InvalidScenario, kModule, "sampled representation needs frames");
  for (const auto& f : r.frames) {
    if (f.ambient_dim() != ambient_dim_ || f.intrinsic_dim() != intrinsic_dim_)
      throw Error(ErrorCode::InvalidScenario, kModule, "sampled frame dimensions disagree");
    if (!frame_consistent(f))
      throw Error(ErrorCode::InvalidScenario, kModule, "sampled frame is not orthonormal");
  }
}

const ImplicitRep& ManifoldSpec::implicit_rep() const { return std::get<ImplicitRep>(rep_); }
const ParametricRep& ManifoldSpec::parametric_rep() const { return std::get<ParametricRep>(rep_); }
const SampledRep& ManifoldSpec::sampled_rep() const { return std::get<SampledRep>(rep_); }

int ManifoldSpec::patch_count() const {
  return kind_ == RepresentationKind::Parametric
             ? static_cast<int>(parametric_rep().patches.size())
             : 0;
}

Vector ManifoldSpec::constraint_value(const Vector& x) const {
  Vector out(codim());
  constraint_value_into(x, out);
  return out;
}

void ManifoldSpec::constraint_value_into(const Vector& x, Vector& out) const {
  const auto& r = implicit_rep();
  const int args = ambient_dim_ + static_cast<int>(r.bound_args.size());
  eval_map_into(r.constraints, arg_scratch(x, r.bound_args), args, out);
}

Matrix ManifoldSpec::constraint_jacobian(const Vector& x) const {
  Matrix out(codim(), ambient_dim_);
  constraint_jacobian_into(x, out);
  return out;
}

void ManifoldSpec::constraint_jacobian_into(const Vector& x, Matrix& out) const {
  const auto& r = implicit_rep();
  const int args = ambient_dim_ + static_cast<int>(r.bound_args.size());
  double* scratch = arg_scratch(x, r.bound_args);
  if (!r.jacobian.empty()) {
    for (int i = 0; i < codim(); ++i)
      for (int j = 0; j < ambient_dim_; ++j)
        out(i, j) = r.jacobian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(
            scratch, args);
    return;
  }
  fd_jacobian_into(r.constraints, scratch, args, ambient_dim_, x.norm(), out);
}

double ManifoldSpec::scaled_constraint_residual(const Vector& x) const {
  Vector f = constraint_value(x);
  Matrix jac = constraint_jacobian(x);
  for (int i = 0; i < f.size(); ++i) f(i) /= std::max(1.0, jac.row(i).norm());
  return f.norm();
}

Vector ManifoldSpec::patch_value(int patch, const Vector& q) const {
  Vector out(ambient_dim_);
  patch_value_into(patch, q, out);
  return out;
}

void ManifoldSpec::patch_value_into(int patch, const Vector& q, Vector& out) const {
  const auto& r = parametric_rep();
  const int args = intrinsic_dim_ + static_cast<int>(r.bound_args.size());
  eval_map_into(r.patches[static_cast<std::size_t>(patch)].map, arg_scratch(q, r.bound_args),
                args, out);
}

Matrix ManifoldSpec::patch_jacobian(int patch, const Vector& q) const {
  Matrix out(ambient_dim_, intrinsic_dim_);
  patch_jacobian_into(patch, q, out);
  return out;
}

void ManifoldSpec::patch_jacobian_into(int patch, const Vector& q, Matrix& out) const {
  const auto& r = parametric_rep();
  const int args = intrinsic_dim_ + static_cast<int>(r.bound_args.size());
  fd_jacobian_into(r.patches[static_cast<std::size_t>(patch)].map, arg_scratch(q, r.bound_args),
                   args, intrinsic_dim_, q.norm(), out);
}

Vector ManifoldSpec::wrap_param(int patch, Vector q) const {
  const auto& p = parametric_rep().patches[static_cast<std::size_t>(patch)];
  for (int d = 0; d < intrinsic_dim_; ++d) {
    if (d < static_cast<int>(p.periodic.size()) && p.periodic[static_cast<std::size_t>(d)]) {
      const double lo = p.domain.bounds(d, 0);
      const double span = p.domain.bounds(d, 1) - lo;
      if (span > 0.0) q(d) = lo + std::fmod(std::fmod(q(d) - lo, span) + span, span);
    }
  }
  return q;
}

// ---------------------------------------------------------------------------

namespace {

/// Kernel/row-space split of the constraint Jacobian. Returns false when the
/// rank check fails.
bool implicit_bases(const ManifoldSpec& m, const Matrix& jac, Matrix* tangent, Matrix* normal) {
  Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeFullV);
  const int k = m.codim();
  const auto& sv = svd.singularValues();
  if (sv(k - 1) <= m.tolerances().rank_tol * sv(0)) return false;
  if (tangent != nullptr) *tangent = svd.matrixV().rightCols(m.intrinsic_dim());
  if (normal != nullptr) *normal = svd.matrixV().leftCols(k);
  return true;
}

/// QR variant for solver loops: same split, cheaper than an SVD.
bool implicit_tangent_qr(const ManifoldSpec& m, const Matrix& jac, Matrix& tangent) {
  const int k = m.codim();
  const int n = m.ambient_dim();
  Eigen::ColPivHouseholderQR<Matrix> qr(jac.transpose());
  const auto& r = qr.matrixR();
  if (std::abs(r(k - 1, k - 1)) <= m.tolerances().rank_tol * std::abs(r(0, 0))) return false;
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  tangent = q.rightCols(n - k);
  return true;
}

TangentFrame frame_at_implicit_point(const ManifoldSpec& m, const Vector& p) {
  Matrix jac = m.constraint_jacobian(p);
  TangentFrame frame;
  if (!implicit_bases(m, jac, &frame.tangent_basis, &frame.normal_basis))
    throw Error(ErrorCode::RankDeficient, kModule,
                "constraint jacobian drops rank at the queried point");
  frame.base_point = p;
  return frame;
}

}  // namespace

TangentFrame frame_at_param(const ManifoldSpec& m, int patch, const Vector& q) {
  Matrix jac = m.patch_jacobian(patch, q);
  Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  if (sv(m.intrinsic_dim() - 1) <= m.tolerances().rank_tol * sv(0))
    throw Error(ErrorCode::RankDeficient, kModule, "patch derivative drops rank");
  TangentFrame frame;
  frame.base_point = m.patch_value(patch, q);
  frame.tangent_basis = svd.matrixU().leftCols(m.intrinsic_dim());
  frame.normal_basis = svd.matrixU().rightCols(m.codim());
  frame.patch = patch;
  frame.param = m.wrap_param(patch, q);
  return frame;
}

double membership_distance(const ManifoldSpec& m, const Vector& x) {
  switch (m.kind()) {
    case RepresentationKind::Implicit:
      return m.scaled_constraint_residual(x);
    case RepresentationKind::Parametric:
      return nearest_point_parametric(m, x).distance;
    case RepresentationKind::Sampled: {
      return project_sampled(m, x).distance;
    }
  }
  return 0.0;
}

bool on_manifold(const ManifoldSpec& m, const Vector& x, double tol) {
  if (tol < 0.0) tol = m.tolerances().on_manifold_tol;
  return membership_distance(m, x) < tol;
}

TangentFrame tangent_space(const ManifoldSpec& m, const Vector& x) {
  switch (m.kind()) {
    case RepresentationKind::Implicit: {
      if (m.scaled_constraint_residual(x) >= m.tolerances().on_manifold_tol)
        throw Error(ErrorCode::NotOnManifold, kModule,
                    "constraint residual " + std::to_string(m.scaled_constraint_residual(x)));
      return frame_at_implicit_point(m, x);
    }
    case RepresentationKind::Parametric: {
      ProjectorResult near = nearest_point_parametric(m, x);
      if (!(near.distance < m.tolerances().on_manifold_tol))
        throw Error(ErrorCode::NotOnManifold, kModule,
                    "nearest chart point at distance " + std::to_string(near.distance));
      return frame_at_param(m, near.patch, near.param);
    }
    case RepresentationKind::Sampled: {
      ProjectorResult near = project_sampled(m, x);
      if (!(near.distance < m.tolerances().on_manifold_tol))
        throw Error(ErrorCode::NotOnManifold, kModule,
                    "tangent-plane residual " + std::to_string(near.distance));
      return m.sampled_rep().frames[static_cast<std::size_t>(near.patch)];
    }
  }
  throw Error(ErrorCode::InvalidScenario, kModule, "unreachable");
}

// ---------------------------------------------------------------------------
// Projection solvers

namespace {

/// Newton restoration onto F = 0 (least-norm Gauss-Newton steps).
bool restore_to_constraint(const ManifoldSpec& m, Vector& p, int max_iter = 30) {
  const int k = m.codim();
  Vector f(k), fc(k);
  Matrix jac(k, m.ambient_dim());
  Vector cand = p;
  for (int it = 0; it < max_iter; ++it) {
    m.constraint_value_into(p, f);
    if (!f.allFinite()) return false;
    m.constraint_jacobian_into(p, jac);
    double scaled = 0.0;
    for (int i = 0; i < k; ++i)
      scaled = std::max(scaled, std::abs(f(i)) / std::max(1.0, jac.row(i).norm()));
    if (scaled < 1e-13) return true;
    Matrix jjt = jac * jac.transpose();
    Vector lambda = jjt.ldlt().solve(f);
    Vector step = -jac.transpose() * lambda;
    if (!step.allFinite()) return false;
    double alpha = 1.0;
    const double merit0 = f.squaredNorm();
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      cand = p + alpha * step;
      m.constraint_value_into(cand, fc);
      if (fc.allFinite() && fc.squaredNorm() < merit0) {
        p = cand;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return false;
  }
  return m.scaled_constraint_residual(p) < 1e-10;
}

}  // namespace

ProjectorResult project_single_implicit(const ManifoldSpec& m, const Vector& x, const Vector& p0,
                                        const ProjectorConfig& cfg) {
  const int n = m.ambient_dim();
  const int k = m.codim();
  ProjectorResult res;
  res.point = p0;

  // Restore-then-slide globalization: keep the iterate on the constraint set
  // and descend the true distance along the tangent space (monotone, no
  // off-manifold stalls), switching to the coupled stationarity Newton for a
  // quadratic tail once the tangential residual is small.
  Vector p = p0;
  if (!restore_to_constraint(m, p)) return res;
  Matrix jac(k, n);
  Vector f(k);
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it;
    m.constraint_jacobian_into(p, jac);
    Matrix tangent;
    if (!implicit_tangent_qr(m, jac, tangent)) return res;
    Vector g = tangent.transpose() * (x - p);
    res.residual = g.norm();
    res.point = p;
    if (res.residual < cfg.residual_tol) {
      res.converged = true;
      break;
    }

    const double d0 = (x - p).squaredNorm();
    bool moved = false;
    if (res.residual < 0.05 * (1.0 + std::sqrt(d0))) {
      // Coupled Newton on [F; T^T (x - p)] with frozen tangent.
      m.constraint_value_into(p, f);
      Matrix system(n, n);
      Vector rhs(n);
      for (int i = 0; i < k; ++i) {
        const double s = 1.0 / std::max(1.0, jac.row(i).norm());
        system.row(i) = s * jac.row(i);
        rhs(i) = -s * f(i);
      }
      system.bottomRows(n - k) = -tangent.transpose();
      rhs.tail(n - k) = -g;
      Vector step = system.colPivHouseholderQr().solve(rhs);
      if (step.allFinite()) {
        Vector cand = p + step;
        if (restore_to_constraint(m, cand) && (x - cand).squaredNorm() <= d0) {
          if (step.norm() < cfg.step_tol) {
            p = cand;
            res.point = p;
            break;
          }
          p = cand;
          moved = true;
        }
      }
    }
    if (!moved) {
      Vector dir = tangent * g;
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        Vector cand = p + alpha * dir;
        if (restore_to_constraint(m, cand) && (x - cand).squaredNorm() < d0) {
          p = cand;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      if (alpha * dir.norm() < cfg.step_tol) {
        res.point = p;
        break;
      }
    }
  }
  // Final stationarity residual with a fresh tangent basis.
  m.constraint_value_into(res.point, f);
  m.constraint_jacobian_into(res.point, jac);
  Matrix tangent;
  if (f.allFinite() && implicit_tangent_qr(m, jac, tangent)) {
    Vector scale(k);
    for (int i = 0; i < k; ++i) scale(i) = 1.0 / std::max(1.0, jac.row(i).norm());
    Vector residual(n);
    residual.head(k) = scale.asDiagonal() * f;
    residual.tail(n - k) = tangent.transpose() * (x - res.point);
    res.residual = residual.norm();
    res.converged = res.residual < cfg.residual_tol;
  } else {
    res.converged = false;
  }
  res.distance = (x - res.point).norm();
  return res;
}

ProjectorResult project_single_parametric(const ManifoldSpec& m, const Vector& x, int patch,
                                          const Vector& q0, const ProjectorConfig& cfg) {
  const auto& dom = m.parametric_rep().patches[static_cast<std::size_t>(patch)].domain;
  ProjectorResult res;
  res.patch = patch;

  const int n = m.ambient_dim();
  const int mdim = m.intrinsic_dim();
  Vector q = m.wrap_param(patch, q0);
  Vector y(n), yc(n);
  Matrix jac(n, mdim);
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it;
    m.patch_value_into(patch, q, y);
    if (!y.allFinite()) return res;
    Vector e = x - y;
    m.patch_jacobian_into(patch, q, jac);
    Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    const auto& r = qr.matrixR();
    if (std::abs(r(mdim - 1, mdim - 1)) <= m.tolerances().rank_tol * std::abs(r(0, 0)))
      return res;

    Vector grad = jac.transpose() * e;
    const double scale = std::max(1.0, jac.colwise().norm().maxCoeff() * (1.0 + e.norm()));
    res.residual = grad.norm() / scale;
    res.param = q;
    res.point = y;
    if (res.residual < cfg.residual_tol) {
      res.converged = true;
      break;
    }

    Vector step = qr.solve(e);  // Gauss-Newton least-squares step
    if (!step.allFinite()) return res;
    const double merit0 = e.squaredNorm();
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Vector qc = m.wrap_param(patch, q + alpha * step);
      m.patch_value_into(patch, qc, yc);
      if (yc.allFinite() && (x - yc).squaredNorm() < merit0) {
        q = qc;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (alpha * step.norm() < cfg.step_tol) break;
  }

  q = m.wrap_param(patch, q);
  res.param = q;
  res.point = m.patch_value(patch, q);
  res.distance = (x - res.point).norm();
  // Final stationarity residual (the loop may exit through the small-step
  // branch before the top-of-loop convergence test).
  if (res.point.allFinite()) {
    m.patch_jacobian_into(patch, q, jac);
    Eigen::ColPivHouseholderQR<Matrix> qr(jac);
    const auto& r = qr.matrixR();
    if (std::abs(r(mdim - 1, mdim - 1)) > m.tolerances().rank_tol * std::abs(r(0, 0))) {
      Vector e = x - res.point;
      const double scale = std::max(1.0, jac.colwise().norm().maxCoeff() * (1.0 + e.norm()));
      res.residual = (jac.transpose() * e).norm() / scale;
      res.converged = res.residual < cfg.residual_tol;
    } else {
      res.converged = false;
    }
  }
  // Outside a non-periodic chart the foot point is not on the declared piece.
  const auto& p = m.parametric_rep().patches[static_cast<std::size_t>(patch)];
  for (int d = 0; d < m.intrinsic_dim(); ++d) {
    const bool periodic =
        d < static_cast<int>(p.periodic.size()) && p.periodic[static_cast<std::size_t>(d)];
    if (periodic) continue;
    const double span = dom.bounds(d, 1) - dom.bounds(d, 0);
    if (q(d) < dom.bounds(d, 0) - 1e-9 * span || q(d) > dom.bounds(d, 1) + 1e-9 * span)
      res.converged = false;
  }
  return res;
}

ProjectorResult project_sampled(const ManifoldSpec& m, const Vector& x) {
  const auto& frames = m.sampled_rep().frames;
  int best = 0;
  double best_d2 = (x - frames[0].base_point).squaredNorm();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const double d2 = (x - frames[i].base_point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  const auto& f = frames[static_cast<std::size_t>(best)];
  ProjectorResult res;
  res.converged = true;
  res.point = f.base_point + f.tangent_basis * (f.tangent_basis.transpose() * (x - f.base_point));
  res.distance = (x - res.point).norm();
  res.patch = best;  // frame index, reused by tangent_space
  return res;
}

ProjectorResult nearest_point_parametric(const ManifoldSpec& m, const Vector& x, int grid_per_dim,
                                         const ProjectorConfig& cfg) {
  const auto& rep = m.parametric_rep();
  const int mdim = m.intrinsic_dim();
  ProjectorResult best;
  best.distance = std::numeric_limits<double>::infinity();

  for (int patch = 0; patch < m.patch_count(); ++patch) {
    const auto& dom = rep.patches[static_cast<std::size_t>(patch)].domain;
    // Coarse midpoint grid, best seed per patch.
    Vector seed(mdim);
    Vector q(mdim);
    double seed_d2 = std::numeric_limits<double>::infinity();
    const int cells = static_cast<int>(std::round(std::pow(grid_per_dim, mdim)));
    for (int c = 0; c < cells; ++c) {
      int rem = c;
      for (int d = 0; d < mdim; ++d) {
        const int i = rem % grid_per_dim;
        rem /= grid_per_dim;
        q(d) = dom.bounds(d, 0) +
               (dom.bounds(d, 1) - dom.bounds(d, 0)) * (i + 0.5) / grid_per_dim;
      }
      Vector y = m.patch_value(patch, q);
      if (!y.allFinite()) continue;
      const double d2 = (x - y).squaredNorm();
      if (d2 < seed_d2) {
        seed_d2 = d2;
        seed = q;
      }
    }
    if (!std::isfinite(seed_d2)) continue;
    ProjectorResult r = project_single_parametric(m, x, patch, seed, cfg);
    if (!r.converged) {
      // Fall back to the raw grid point as an upper bound.
      r.param = seed;
      r.point = m.patch_value(patch, seed);
      r.distance = std::sqrt(seed_d2);
    }
    if (r.distance < best.distance) best = r;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

std::vector<TangentFrame> sample_parametric(const ManifoldSpec& m, int budget, CounterRng rng) {
  const auto& rep = m.parametric_rep();
  const int patches = static_cast<int>(rep.patches.size());
  const int mdim = m.intrinsic_dim();
  std::vector<TangentFrame> out;
  out.reserve(static_cast<std::size_t>(budget));
  std::uint64_t attempt = 0;
  const std::uint64_t max_attempts = static_cast<std::uint64_t>(50) * budget + 100;
  while (static_cast<int>(out.size()) < budget && attempt < max_attempts) {
    const int patch = static_cast<int>(out.size()) % patches;
    const auto& dom = rep.patches[static_cast<std::size_t>(patch)].domain;
    Vector q(mdim);
    for (int d = 0; d < mdim; ++d) {
      const double u =
          static_cast<double>(rng.at(attempt * static_cast<std::uint64_t>(mdim) +
                                     static_cast<std::uint64_t>(d)) >> 11) * 0x1.0p-53;
      q(d) = dom.bounds(d, 0) + u * (dom.bounds(d, 1) - dom.bounds(d, 0));
    }
    ++attempt;
    try {
      out.push_back(frame_at_param(m, patch, q));
    } catch (const Error&) {
      continue;  // rank-deficient parameter draw; take the next counter
    }
  }
  if (static_cast<int>(out.size()) < budget)
    throw Error(ErrorCode::SamplingFailed, kModule, "chart sampling exhausted its attempt budget");
  return out;
}

std::vector<TangentFrame> sample_implicit(const ManifoldSpec& m, int budget, CounterRng rng) {
  const int n = m.ambient_dim();
  const auto& box = m.bounding_box();
  std::vector<TangentFrame> out;
  out.reserve(static_cast<std::size_t>(budget));
  std::uint64_t attempt = 0;
  const std::uint64_t max_attempts = std::max<std::uint64_t>(200, static_cast<std::uint64_t>(20) * budget);
  ProjectorConfig cfg;
  while (static_cast<int>(out.size()) < budget && attempt < max_attempts) {
    Vector draw(n);
    for (int d = 0; d < n; ++d) {
      const double u =
          static_cast<double>(rng.at(attempt * static_cast<std::uint64_t>(n) +
                                     static_cast<std::uint64_t>(d)) >> 11) * 0x1.0p-53;
      draw(d) = box.bounds(d, 0) + u * (box.bounds(d, 1) - box.bounds(d, 0));
    }
    ++attempt;
    ProjectorResult proj = project_single_implicit(m, draw, draw, cfg);
    if (!proj.converged) continue;
    if (m.scaled_constraint_residual(proj.point) >= m.tolerances().on_manifold_tol) continue;
    if (!box.contains(proj.point, 1e-9)) continue;
    try {
      out.push_back(frame_at_implicit_point(m, proj.point));
    } catch (const Error&) {
      continue;
    }
    // The 90% failure guard, once enough attempts are in to judge.
    if (attempt >= 200 && out.size() * 10 < attempt)
      throw Error(ErrorCode::SamplingFailed, kModule,
                  "more than 90% of projection attempts failed to converge");
  }
  if (static_cast<int>(out.size()) < budget)
    throw Error(ErrorCode::SamplingFailed, kModule,
                "more than 90% of projection attempts failed to converge");
  return out;
}

std::vector<TangentFrame> sample_stored(const ManifoldSpec& m, int budget, CounterRng rng) {
  const auto& frames = m.sampled_rep().frames;
  const int total = static_cast<int>(frames.size());
  if (budget >= total) return frames;
  // Seeded partial Fisher-Yates selection, reported in ascending index order.
  std::vector<int> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < budget; ++i) {
    const std::uint64_t j =
        i + rng.at(static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(total - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(budget));
  std::sort(idx.begin(), idx.end());
  std::vector<TangentFrame> out;
  out.reserve(static_cast<std::size_t>(budget));
  for (int i : idx) out.push_back(frames[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

std::vector<TangentFrame> sample(const ManifoldSpec& m, int budget, std::uint64_t seed) {
  if (budget < 1) throw Error(ErrorCode::InvalidScenario, kModule, "sampling budget must be >= 1");
  CounterRng rng = CounterRng(seed).split("manifold.sample");
  switch (m.kind()) {
    case RepresentationKind::Parametric:
      return sample_parametric(m, budget, rng);
    case RepresentationKind::Implicit:
      return sample_implicit(m, budget, rng);
    case RepresentationKind::Sampled:
      return sample_stored(m, budget, rng);
  }
  throw Error(ErrorCode::InvalidScenario, kModule, "unreachable");
}

ComponentPartition connected_components(std::span<const TangentFrame> frames,
                                        double linking_radius) {
  if (!(linking_radius > 0.0))
    throw Error(ErrorCode::InvalidScenario, kModule, "linking radius must be positive");
  const int n = static_cast<int>(frames.size());
  ComponentPartition part;
  part.label.assign(static_cast<std::size_t>(n), -1);
  const double r2 = linking_radius * linking_radius;
  for (int i = 0; i < n; ++i) {
    if (part.label[static_cast<std::size_t>(i)] != -1) continue;
    const int id = part.count++;
    part.representative.push_back(i);
    std::deque<int> queue{i};
    part.label[static_cast<std::size_t>(i)] = id;
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop_front();
      for (int b = 0; b < n; ++b) {
        if (part.label[static_cast<std::size_t>(b)] != -1) continue;
        if ((frames[static_cast<std::size_t>(a)].base_point -
             frames[static_cast<std::size_t>(b)].base_point)
                .squaredNorm() < r2) {
          part.label[static_cast<std::size_t>(b)] = id;
          queue.push_back(b);
        }
      }
    }
  }
  return part;
}

double median_nn_distance(std::span<const TangentFrame> frames) {
  const int n = static_cast<int>(frames.size());
  if (n < 2) return 0.0;
  std::vector<double> nn(static_cast<std::size_t>(n),
                         std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = (frames[static_cast<std::size_t>(i)].base_point -
                        frames[static_cast<std::size_t>(j)].base_point)
                           .norm();
      nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], d);
      nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d);
    }
  std::sort(nn.begin(), nn.end());
  const std::size_t mid = nn.size() / 2;
  return nn.size() % 2 == 1 ? nn[mid] : 0.5 * (nn[mid - 1] + nn[mid]);
}

}  // namespace tubecert
