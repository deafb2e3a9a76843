#include "tubecert/retraction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tubecert/rng.hpp"

namespace tubecert {

namespace {
constexpr const char* kModule = "retraction-engine";
}

TubularNeighborhood::TubularNeighborhood(std::shared_ptr<const ManifoldSpec> manifold,
                                         ScalarField delta, SolverConfig solver,
                                         std::vector<TangentFrame> start_cloud,
                                         double reach_lower_bound)
    : manifold_(std::move(manifold)),
      delta_(std::move(delta)),
      solver_(solver),
      cloud_(std::move(start_cloud)),
      reach_(reach_lower_bound) {
  if (!manifold_) throw Error(ErrorCode::InvalidScenario, kModule, "null manifold");
}

std::vector<int> TubularNeighborhood::nearest_cloud(const Vector& x, int k) const {
  const int n = static_cast<int>(cloud_.size());
  std::vector<std::pair<double, int>> order;
  order.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    order.emplace_back((cloud_[static_cast<std::size_t>(i)].base_point - x).squaredNorm(), i);
  const int take = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + take, order.end());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) out.push_back(order[static_cast<std::size_t>(i)].second);
  return out;
}

namespace {

std::vector<ProjectorResult> converged_candidates(const TubularNeighborhood& tube,
                                                  const Vector& x) {
  const ManifoldSpec& m = tube.manifold();
  const ProjectorConfig pcfg = tube.solver().projector();
  std::vector<ProjectorResult> out;

  switch (m.kind()) {
    case RepresentationKind::Sampled: {
      out.push_back(project_sampled(m, x));
      break;
    }
    case RepresentationKind::Implicit: {
      ProjectorResult own = project_single_implicit(m, x, x, pcfg);
      if (own.converged) out.push_back(own);
      for (int idx : tube.nearest_cloud(x, tube.solver().multistart)) {
        ProjectorResult r = project_single_implicit(
            m, x, tube.start_cloud()[static_cast<std::size_t>(idx)].base_point, pcfg);
        if (r.converged) out.push_back(r);
      }
      break;
    }
    case RepresentationKind::Parametric: {
      for (int idx : tube.nearest_cloud(x, tube.solver().multistart)) {
        const TangentFrame& f = tube.start_cloud()[static_cast<std::size_t>(idx)];
        if (f.patch < 0) continue;
        ProjectorResult r = project_single_parametric(m, x, f.patch, f.param, pcfg);
        if (r.converged) out.push_back(r);
      }
      if (out.empty()) {
        ProjectorResult r = nearest_point_parametric(m, x, 24, pcfg);
        if (r.converged) out.push_back(r);
      }
      break;
    }
  }
  return out;
}

}  // namespace

ProjectorResult project_detail(const TubularNeighborhood& tube, const Vector& x) {
  std::vector<ProjectorResult> candidates = converged_candidates(tube, x);
  if (candidates.empty())
    throw Error(ErrorCode::NoConvergence, kModule, "no projection start converged");

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ProjectorResult& a, const ProjectorResult& b) {
                     return a.distance < b.distance;
                   });
  const ProjectorResult& best = candidates.front();
  const double ambiguity_tol = tube.solver().ambiguity_base * (1.0 + best.distance);
  const double ambiguity_sep = 10.0 * ambiguity_tol;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const ProjectorResult& other = candidates[i];
    if (other.distance - best.distance < ambiguity_tol &&
        (other.point - best.point).norm() > ambiguity_sep)
      throw Error(ErrorCode::AmbiguousProjection, kModule,
                  "two minima at distance " + std::to_string(best.distance) +
                      " with separated foot points");
  }
  return best;
}

Vector project(const TubularNeighborhood& tube, const Vector& x) {
  return project_detail(tube, x).point;
}

ProjectorResult project_from_hint(const TubularNeighborhood& tube, const Vector& x,
                                  const ProjectorResult& hint) {
  const ManifoldSpec& m = tube.manifold();
  const ProjectorConfig pcfg = tube.solver().projector();
  switch (m.kind()) {
    case RepresentationKind::Sampled:
      return project_sampled(m, x);
    case RepresentationKind::Implicit: {
      ProjectorResult r = project_single_implicit(m, x, hint.point, pcfg);
      if (r.converged) return r;
      break;
    }
    case RepresentationKind::Parametric: {
      if (hint.patch >= 0) {
        ProjectorResult r = project_single_parametric(m, x, hint.patch, hint.param, pcfg);
        if (r.converged) return r;
      }
      break;
    }
  }
  return project_detail(tube, x);
}

namespace {

RetractionJet jet_impl(const TubularNeighborhood& tube, const Vector& x, bool richardson) {
  const int n = tube.manifold().ambient_dim();
  RetractionJet out;
  out.input_point = x;
  out.base = project_detail(tube, x);
  out.value = out.base.point;

  const double h = tube.solver().jet_step * std::max(1.0, x.norm());
  Matrix coarse(n, n), fine(n, n);
  Vector probe = x;
  auto foot = [&](double offset, int axis) {
    probe(axis) = x(axis) + offset;
    Vector p = project_from_hint(tube, probe, out.base).point;
    probe(axis) = x(axis);
    return p;
  };
  for (int j = 0; j < n; ++j) {
    coarse.col(j) = (foot(h, j) - foot(-h, j)) / (2.0 * h);
    if (richardson) fine.col(j) = (foot(0.5 * h, j) - foot(-0.5 * h, j)) / h;
  }
  if (richardson) {
    const double disagreement = (coarse - fine).lpNorm<Eigen::Infinity>();
    if (disagreement > tube.solver().jet_instability_tol)
      throw Error(ErrorCode::DerivativeUnstable, kModule,
                  "difference levels disagree by " + std::to_string(disagreement));
    out.derivative = (4.0 * fine - coarse) / 3.0;
  } else {
    out.derivative = coarse;
  }
  Eigen::JacobiSVD<Matrix> svd(out.derivative);
  out.operator_norm = svd.singularValues()(0);
  return out;
}

}  // namespace

RetractionJet jet(const TubularNeighborhood& tube, const Vector& x) {
  return jet_impl(tube, x, true);
}

RetractionJet jet_fast(const TubularNeighborhood& tube, const Vector& x) {
  return jet_impl(tube, x, false);
}

bool in_tube(const TubularNeighborhood& tube, const Vector& x) {
  ProjectorResult r = project_detail(tube, x);
  return r.distance < tube.delta_at(r.point);
}

double estimate_reach(const TubularNeighborhood& tube, std::span<const TangentFrame> samples,
                      int probe_budget, const ReachConfig& rc) {
  if (samples.empty())
    throw Error(ErrorCode::InvalidScenario, kModule, "reach estimation needs samples");
  const double scale = tube.manifold().bounding_box().half_diagonal();
  const double step = rc.step > 0.0 ? rc.step : 0.05 * scale;
  const double max_radius = rc.max_radius > 0.0 ? rc.max_radius : scale;
  const int count = std::min<int>(probe_budget, static_cast<int>(samples.size()));

  double largest_pass = 0.0;
  for (double t = step; t <= max_radius * (1.0 + 1e-12); t += step) {
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      const TangentFrame& f = samples[static_cast<std::size_t>(i)];
      for (int c = 0; c < f.normal_basis.cols() && ok; ++c) {
        for (double sign : {1.0, -1.0}) {
          Vector probe = f.base_point + sign * t * f.normal_basis.col(c);
          try {
            Vector foot = project(tube, probe);
            if ((foot - f.base_point).norm() > rc.probe_tol) {
              ok = false;
              break;
            }
          } catch (const Error&) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) break;
    largest_pass = t;
  }
  return 0.5 * largest_pass;
}

std::vector<BatchRow> project_batch(const TubularNeighborhood& tube, const Matrix& points) {
  std::vector<BatchRow> rows;
  rows.reserve(static_cast<std::size_t>(points.rows()));
  const int n = tube.manifold().ambient_dim();
  for (Index i = 0; i < points.rows(); ++i) {
    BatchRow row;
    row.input = points.row(i).transpose();
    row.foot = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    try {
      ProjectorResult r = project_detail(tube, row.input);
      row.foot = r.point;
      row.distance = r.distance;
      row.converged = true;
    } catch (const Error&) {
      row.converged = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

/// Greedy farthest-point subset: near-uniform spacing, so nearest-neighbor
/// heuristics (linking radius, multi-start coverage) behave predictably.
std::vector<TangentFrame> farthest_point_subset(std::vector<TangentFrame> frames,
                                                std::size_t keep) {
  if (frames.size() <= keep) return frames;
  std::vector<TangentFrame> out;
  out.reserve(keep);
  std::vector<double> dist(frames.size(), std::numeric_limits<double>::infinity());
  std::size_t pick = 0;
  for (std::size_t round = 0; round < keep; ++round) {
    out.push_back(frames[pick]);
    double best = -1.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      dist[i] = std::min(dist[i], (frames[i].base_point - frames[pick].base_point).norm());
      if (dist[i] > best) {
        best = dist[i];
        next = i;
      }
    }
    pick = next;
  }
  return out;
}

}  // namespace

TubularNeighborhood make_tube(std::shared_ptr<const ManifoldSpec> manifold,
                              std::optional<ScalarField> delta, const TubeBuildOptions& opt) {
  if (!manifold) throw Error(ErrorCode::InvalidScenario, kModule, "null manifold");
  const std::uint64_t cloud_seed = CounterRng(opt.seed).split("tube.cloud").key();
  std::vector<TangentFrame> cloud = farthest_point_subset(
      sample(*manifold, 4 * opt.cloud_budget, cloud_seed),
      static_cast<std::size_t>(opt.cloud_budget));

  double reach = 0.0;
  if (opt.estimate_reach || !delta.has_value()) {
    TubularNeighborhood provisional(manifold, constant_field(1e30), opt.solver, cloud, 0.0);
    reach = estimate_reach(provisional, cloud, opt.reach_probe_budget, opt.reach);
  }

  ScalarField field;
  if (delta.has_value()) {
    field = *delta;
  } else {
    if (!(reach > 0.0))
      throw Error(ErrorCode::BudgetDegenerate, kModule,
                  "no certified tubular radius; supply delta explicitly");
    field = constant_field(0.5 * reach);
  }
  return TubularNeighborhood(std::move(manifold), std::move(field), opt.solver, std::move(cloud),
                             reach);
}

}  // namespace tubecert
