#include "tubecert/equivalence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "tubecert/numdiff.hpp"
#include "tubecert/rng.hpp"

namespace tubecert {

namespace {

constexpr const char* kModule = "equivalence-checker";

double operator_defect(const Matrix& derivative, const Matrix& tangent_basis) {
  // sup over unit u in span(tangent_basis) of |(D - I) u|.
  Matrix cols = derivative * tangent_basis - tangent_basis;
  Eigen::JacobiSVD<Matrix> svd(cols);
  return svd.singularValues()(0);
}

using Cache = std::map<std::vector<double>, double>;

std::vector<double> cache_key(const Vector& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Closeness

ClosenessReport closeness(const TubularNeighborhood& tube_m, const ManifoldSpec& n,
                          const CorrespondenceMap& h, std::span<const TangentFrame> samples) {
  (void)n;
  ClosenessReport report;
  const std::size_t count = samples.size();
  report.points.reserve(count);
  report.images.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    const TangentFrame& frame = samples[i];
    const Vector& x = frame.base_point;
    Vector image;
    Matrix dh;
    double dist;
    if (h.retraction_seeded()) {
      RetractionJet j = jet(tube_m, x);
      image = j.value;
      dh = j.derivative;
      dist = j.base.distance;
    } else {
      auto apply = [&](const Vector& p) {
        Vector out(static_cast<Index>(h.components.size()));
        for (std::size_t c = 0; c < h.components.size(); ++c)
          out(static_cast<Index>(c)) = h.components[c].eval(p);
        return out;
      };
      image = apply(x);
      dh = fd_jacobian(apply, x, static_cast<int>(h.components.size()));
      dist = project_detail(tube_m, x).distance;
    }
    if (membership_distance(tube_m.manifold(), image) > 1e-6)
      throw Error(ErrorCode::MapLeavesManifold, kModule,
                  "h(x) misses the target manifold at sample " + std::to_string(i));

    const double c0 = (image - x).norm();
    const double c1 = operator_defect(dh, frame.tangent_basis);
    report.points.push_back(x);
    report.images.push_back(image);
    report.c0_defect.push_back(c0);
    report.c1_defect.push_back(c1);
    report.combined.push_back(c0 + c1);
    report.dist_to_m.push_back(dist);
    if (c0 + c1 > report.combined_max) {
      report.combined_max = c0 + c1;
      report.worst = static_cast<int>(i);
    }
    report.c0_max = std::max(report.c0_max, c0);
    report.c1_max = std::max(report.c1_max, c1);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Budget

EpsilonBudget budget(const TubularNeighborhood& tube, const BoundingBox& region,
                     std::span<const TangentFrame> samples, const BudgetConfig& cfg) {
  const TubularNeighborhood* t = &tube;
  const auto& cloud = tube.start_cloud();
  if (cloud.empty())
    throw Error(ErrorCode::BudgetDegenerate, kModule, "tube has an empty start cloud");

  // Components of the base manifold's cloud, ball radii q, and the global cap.
  const double linking =
      cfg.linking_radius > 0.0 ? cfg.linking_radius : 3.0 * median_nn_distance(cloud);
  ComponentPartition parts = connected_components(cloud, std::max(linking, 1e-12));

  EpsilonBudget out;
  out.representatives = parts.representative;
  for (int comp = 0; comp < parts.count; ++comp) {
    std::vector<int> members;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (parts.label[i] == comp) members.push_back(static_cast<int>(i));
    double diameter = 0.0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        diameter = std::max(
            diameter, (cloud[static_cast<std::size_t>(members[a])].base_point -
                       cloud[static_cast<std::size_t>(members[b])].base_point)
                          .norm());
    const Vector& z =
        cloud[static_cast<std::size_t>(parts.representative[static_cast<std::size_t>(comp)])]
            .base_point;
    // Start at diameter/4 and halve until the ball's sample graph is a single
    // component. Singleton components fall back to the linking radius.
    double q = diameter > 0.0 ? 0.25 * diameter : linking;
    while (q > 1e-12) {
      std::vector<TangentFrame> ball;
      for (int idx : members)
        if ((cloud[static_cast<std::size_t>(idx)].base_point - z).norm() < q)
          ball.push_back(cloud[static_cast<std::size_t>(idx)]);
      if (!ball.empty() && connected_components(ball, linking).count == 1) break;
      q *= 0.5;
    }
    out.q_radius.push_back(q);
  }
  out.q_cap = *std::min_element(out.q_radius.begin(), out.q_radius.end()) / 32.0;

  // Probe geometry shared by mu and the derivative cap.
  const double reach = tube.reach_lower_bound();
  const double r_max = reach > 0.0 ? reach : 0.1 * region.half_diagonal();
  const int radii = cfg.strict ? 2 * cfg.mu_radii : cfg.mu_radii;
  const int directions = cfg.strict ? 2 * cfg.mu_directions : cfg.mu_directions;
  const int n = tube.manifold().ambient_dim();
  auto dirs = std::make_shared<std::vector<Vector>>();
  {
    CounterRng rng = CounterRng(cfg.seed).split("budget.mu.directions");
    for (int d = 0; d < directions; ++d) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v(i) = rng.normal();
      dirs->push_back(v.normalized());
    }
  }

  auto eta_cache = std::make_shared<Cache>();
  auto mu_cache = std::make_shared<Cache>();
  auto cap_cache = std::make_shared<Cache>();

  const double safety = cfg.safety;
  out.eta = ScalarField{
      [t, eta_cache, safety](const Vector& x) {
        auto key = cache_key(x);
        if (auto it = eta_cache->find(key); it != eta_cache->end()) return it->second;
        const double bound = x.norm() + 1.0;
        double inf_near = std::numeric_limits<double>::infinity();
        double inf_all = std::numeric_limits<double>::infinity();
        for (const auto& f : t->start_cloud()) {
          const double half_delta = 0.5 * t->delta_at(f.base_point);
          inf_all = std::min(inf_all, half_delta);
          if (f.base_point.norm() < bound) inf_near = std::min(inf_near, half_delta);
        }
        const double value = safety * (std::isfinite(inf_near) ? inf_near : inf_all);
        (*eta_cache)[key] = value;
        return value;
      },
      true};

  out.mu = ScalarField{
      [t, mu_cache, dirs, r_max, radii](const Vector& x) {
        auto key = cache_key(x);
        if (auto it = mu_cache->find(key); it != mu_cache->end()) return it->second;
        double value = 0.0;
        try {
          RetractionJet base = jet_fast(*t, x);
          double largest_pass = 0.0;
          for (int j = radii - 1; j >= 0; --j) {
            const double r = r_max * std::pow(0.5, j);
            bool ok = true;
            for (const Vector& d : *dirs) {
              try {
                RetractionJet probe = jet_fast(*t, x + r * d);
                Eigen::JacobiSVD<Matrix> svd(probe.derivative - base.derivative);
                if (svd.singularValues()(0) >= 0.125) {
                  ok = false;
                  break;
                }
              } catch (const Error&) {
                ok = false;  // probe left the projectable region
                break;
              }
            }
            if (!ok) break;
            largest_pass = r;
          }
          value = 0.5 * largest_pass;
        } catch (const Error&) {
          value = 0.0;
        }
        (*mu_cache)[key] = value;
        return value;
      },
      false};

  out.derivative_cap = ScalarField{
      [t, cap_cache](const Vector& x) {
        auto key = cache_key(x);
        if (auto it = cap_cache->find(key); it != cap_cache->end()) return it->second;
        const double value = 1.0 / (8.0 * (jet_fast(*t, x).operator_norm + 1.0));
        (*cap_cache)[key] = value;
        return value;
      },
      true};

  const double q_cap = out.q_cap;
  ScalarField eta = out.eta, mu = out.mu, cap = out.derivative_cap;
  out.epsilon = ScalarField{
      [eta, mu, cap, safety, q_cap](const Vector& x) {
        const double raw = std::min({eta(x), mu(x), cap(x)});
        return std::min(safety * raw, q_cap);
      },
      false};

  // Evaluate every field at the samples: records the stats and trips the
  // degeneracy guard early.
  auto& s = out.stats;
  s.eta_min = s.mu_min = s.cap_min = s.epsilon_min = std::numeric_limits<double>::infinity();
  for (const auto& frame : samples) {
    const Vector& x = frame.base_point;
    const double e = out.eta(x);
    const double m = out.mu(x);
    const double c = out.derivative_cap(x);
    const double eps = out.epsilon(x);
    s.eta_min = std::min(s.eta_min, e);
    s.eta_max = std::max(s.eta_max, e);
    s.mu_min = std::min(s.mu_min, m);
    s.mu_max = std::max(s.mu_max, m);
    s.cap_min = std::min(s.cap_min, c);
    s.cap_max = std::max(s.cap_max, c);
    s.epsilon_min = std::min(s.epsilon_min, eps);
    s.epsilon_max = std::max(s.epsilon_max, eps);
    if (e < cfg.degenerate_tol || m < cfg.degenerate_tol || c < cfg.degenerate_tol ||
        eps < cfg.degenerate_tol)
      throw Error(ErrorCode::BudgetDegenerate, kModule,
                  "budget field underflowed " + std::to_string(cfg.degenerate_tol) +
                      " (near-zero reach or wild curvature)");
  }

  // Regional suprema of epsilon over B(z_i, 2 q_i) cap the cloud. The q/32
  // cap already enforces epsilon0 < q/16; this records the attained value on
  // a bounded subset of the ball.
  for (int comp = 0; comp < parts.count; ++comp) {
    const Vector& z =
        cloud[static_cast<std::size_t>(out.representatives[static_cast<std::size_t>(comp)])]
            .base_point;
    const double q = out.q_radius[static_cast<std::size_t>(comp)];
    double sup = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < cloud.size() && used < 32; ++i) {
      if ((cloud[i].base_point - z).norm() >= 2.0 * q) continue;
      sup = std::max(sup, out.epsilon(cloud[i].base_point));
      ++used;
    }
    out.epsilon0.push_back(sup);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fiber solving

namespace {

/// Newton for p in N with p - y orthogonal to T_y M, implicit N.
ProjectorResult fiber_solve_implicit(const ManifoldSpec& n_spec, const Matrix& m_tangent,
                                     const Vector& y, const Vector& p0,
                                     const ProjectorConfig& cfg) {
  const int n = n_spec.ambient_dim();
  const int k = n_spec.codim();
  ProjectorResult res;
  res.point = p0;
  Vector p = p0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it;
    Vector f = n_spec.constraint_value(p);
    if (!f.allFinite()) return res;
    Vector residual(n);
    residual.head(k) = f;
    residual.tail(n - k) = m_tangent.transpose() * (p - y);
    res.residual = residual.norm();
    res.point = p;
    if (res.residual < cfg.residual_tol) {
      res.converged = true;
      break;
    }
    Matrix system(n, n);
    system.topRows(k) = n_spec.constraint_jacobian(p);
    system.bottomRows(n - k) = m_tangent.transpose();
    Vector step = system.colPivHouseholderQr().solve(-residual);
    if (!step.allFinite()) return res;
    double alpha = 1.0;
    bool accepted = false;
    const double merit0 = residual.squaredNorm();
    for (int ls = 0; ls < 30; ++ls) {
      Vector cand = p + alpha * step;
      Vector fc = n_spec.constraint_value(cand);
      if (fc.allFinite()) {
        Vector rc(n);
        rc.head(k) = fc;
        rc.tail(n - k) = m_tangent.transpose() * (cand - y);
        if (rc.squaredNorm() < merit0) {
          p = cand;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (alpha * step.norm() < cfg.step_tol) {
      res.point = p;
      break;
    }
  }
  Vector f = n_spec.constraint_value(res.point);
  if (f.allFinite()) {
    Vector residual(n);
    residual.head(k) = f;
    residual.tail(n - k) = m_tangent.transpose() * (res.point - y);
    res.residual = residual.norm();
    res.converged = res.residual < cfg.residual_tol * 10.0;
  }
  res.distance = (res.point - y).norm();
  return res;
}

/// The same fiber system in chart coordinates for parametric N.
ProjectorResult fiber_solve_parametric(const ManifoldSpec& n_spec, const Matrix& m_tangent,
                                       const Vector& y, int patch, const Vector& q0,
                                       const ProjectorConfig& cfg) {
  ProjectorResult res;
  res.patch = patch;
  Vector q = n_spec.wrap_param(patch, q0);
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it;
    Vector p = n_spec.patch_value(patch, q);
    if (!p.allFinite()) return res;
    Vector g = m_tangent.transpose() * (p - y);
    res.residual = g.norm();
    res.param = q;
    res.point = p;
    if (res.residual < cfg.residual_tol) {
      res.converged = true;
      break;
    }
    Matrix jac = m_tangent.transpose() * n_spec.patch_jacobian(patch, q);  // m x m
    Vector step = jac.colPivHouseholderQr().solve(-g);
    if (!step.allFinite()) return res;
    double alpha = 1.0;
    bool accepted = false;
    const double merit0 = g.squaredNorm();
    for (int ls = 0; ls < 30; ++ls) {
      Vector qc = n_spec.wrap_param(patch, q + alpha * step);
      Vector pc = n_spec.patch_value(patch, qc);
      if (pc.allFinite() && (m_tangent.transpose() * (pc - y)).squaredNorm() < merit0) {
        q = qc;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (alpha * step.norm() < cfg.step_tol) break;
  }
  q = n_spec.wrap_param(patch, q);
  res.param = q;
  res.point = n_spec.patch_value(patch, q);
  res.residual = (m_tangent.transpose() * (res.point - y)).norm();
  res.converged = res.residual < cfg.residual_tol * 10.0;
  res.distance = (res.point - y).norm();
  return res;
}

}  // namespace

std::vector<ProjectorResult> fiber_points(const TubularNeighborhood& tube_m,
                                          const ManifoldSpec& n, const Vector& y, double spread,
                                          int starts, double dedupe_sep,
                                          std::span<const TangentFrame> n_cloud) {
  TangentFrame my = tangent_space(tube_m.manifold(), y);
  const int codim = static_cast<int>(my.normal_basis.cols());
  const ProjectorConfig cfg = tube_m.solver().projector();

  // Normal offsets spanning +-spread.
  std::vector<Vector> offsets;
  if (codim == 1) {
    const int half = std::max(1, starts / 2);
    for (int j = 1; j <= half; ++j)
      for (double sign : {1.0, -1.0})
        offsets.push_back(sign * spread * (static_cast<double>(j) / half) *
                          my.normal_basis.col(0));
  } else {
    CounterRng rng = CounterRng(0).split("fiber.directions");
    const int dirs = std::max(1, starts / 2);
    for (int d = 0; d < dirs; ++d) {
      Vector c(codim);
      for (int i = 0; i < codim; ++i) c(i) = rng.normal();
      Vector dir = (my.normal_basis * c).normalized();
      offsets.push_back(0.5 * spread * dir);
      offsets.push_back(spread * dir);
    }
  }

  std::vector<ProjectorResult> accepted;
  for (const Vector& offset : offsets) {
    const Vector start_point = y + offset;
    ProjectorResult cand;
    switch (n.kind()) {
      case RepresentationKind::Implicit:
        cand = fiber_solve_implicit(n, my.tangent_basis, y, start_point, cfg);
        break;
      case RepresentationKind::Parametric: {
        // Seed at the chart parameter of the nearest N-cloud frame.
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_cloud.size(); ++i) {
          if (n_cloud[i].patch < 0) continue;
          const double d2 = (n_cloud[i].base_point - start_point).squaredNorm();
          if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(i);
          }
        }
        if (best < 0) continue;
        cand = fiber_solve_parametric(n, my.tangent_basis, y,
                                      n_cloud[static_cast<std::size_t>(best)].patch,
                                      n_cloud[static_cast<std::size_t>(best)].param, cfg);
        break;
      }
      case RepresentationKind::Sampled: {
        cand = project_sampled(n, start_point);
        cand.residual = (my.tangent_basis.transpose() * (cand.point - y)).norm();
        cand.converged = cand.residual < 1e-6;
        break;
      }
    }
    if (!cand.converged) continue;
    if ((cand.point - y).norm() > std::max(3.0 * spread, 1e-6)) continue;
    // Membership in the projection fiber: the candidate must project back to y.
    try {
      if ((project(tube_m, cand.point) - y).norm() > 1e-8) continue;
    } catch (const Error&) {
      continue;
    }
    bool duplicate = false;
    for (const auto& kept : accepted)
      if ((kept.point - cand.point).norm() < dedupe_sep) {
        duplicate = true;
        break;
      }
    if (!duplicate) accepted.push_back(std::move(cand));
  }
  return accepted;
}

Vector invert(const TubularNeighborhood& tube_m, const ManifoldSpec& n, const Vector& y,
              std::span<const TangentFrame> n_cloud, const CertifyConfig& cfg) {
  double diameter = 0.0;
  for (std::size_t a = 0; a < n_cloud.size(); ++a)
    for (std::size_t b = a + 1; b < n_cloud.size(); ++b)
      diameter = std::max(diameter, (n_cloud[a].base_point - n_cloud[b].base_point).norm());
  const double sep = std::max(1e-8, cfg.fiber_sep_rel * diameter);
  auto points = fiber_points(tube_m, n, y, tube_m.delta_at(project(tube_m, y)),
                             cfg.fiber_starts, sep, n_cloud);
  if (points.empty())
    throw Error(ErrorCode::FiberEmpty, kModule,
                "no fiber point found over the base point (refutes the certificate)");
  if (points.size() > 1)
    throw Error(ErrorCode::FiberAmbiguous, kModule,
                "fiber holds " + std::to_string(points.size()) +
                    " separated points (refutes the certificate)");
  return points.front().point;
}

// ---------------------------------------------------------------------------
// Certification

DiffeoCertificate certify(const TubularNeighborhood& tube, const ManifoldSpec& n,
                          const ClosenessReport& report, const EpsilonBudget& eps_budget,
                          std::span<const TangentFrame> n_samples, const CertifyConfig& cfg) {
  if (report.points.size() != n_samples.size())
    throw Error(ErrorCode::InvalidScenario, kModule,
                "closeness report and samples disagree in length");

  DiffeoCertificate cert;
  cert.containment.threshold = 1.0;  // dist / delta ratio
  cert.local_diffeo.threshold = cfg.local_diffeo_threshold;
  cert.injectivity.threshold = 1.0;  // fiber cardinality
  cert.surjectivity.threshold = 1.0;
  cert.surjectivity.worst = std::numeric_limits<double>::infinity();

  auto add_witness = [&cert](const std::string& clause, int index, const Vector& point,
                             double value, double threshold, const std::string& note) {
    if (cert.witnesses.size() < 64)
      cert.witnesses.push_back({clause, index, point, value, threshold, note});
  };

  // (i) containment and (ii) the tangent-defect bound, one jet per sample.
  for (std::size_t i = 0; i < n_samples.size(); ++i) {
    const TangentFrame& frame = n_samples[i];
    const Vector& x = frame.base_point;
    double ratio, defect;
    std::string note;
    try {
      RetractionJet j = jet(tube, x);
      const double delta_here = tube.delta_at(j.value);
      ratio = j.base.distance / delta_here;
      defect = operator_defect(j.derivative, frame.tangent_basis);
      if (ratio >= 1.0)
        note = "dist " + std::to_string(j.base.distance) + " vs delta " +
               std::to_string(delta_here);
    } catch (const Error& e) {
      ratio = std::numeric_limits<double>::infinity();
      defect = std::numeric_limits<double>::infinity();
      note = e.what();
    }
    if (ratio > cert.containment.worst) {
      cert.containment.worst = ratio;
      cert.containment.witness = static_cast<int>(i);
    }
    if (ratio >= 1.0) {
      cert.containment.pass = false;
      add_witness("containment", static_cast<int>(i), x, ratio, 1.0, note);
    }
    if (defect > cert.local_diffeo.worst) {
      cert.local_diffeo.worst = defect;
      cert.local_diffeo.witness = static_cast<int>(i);
    }
    if (!(defect < cfg.local_diffeo_threshold)) {
      cert.local_diffeo.pass = false;
      add_witness("local_diffeo", static_cast<int>(i), x, defect, cfg.local_diffeo_threshold,
                  note);
    }
  }

  // (iii) injectivity and (iv) surjectivity via fiber cardinality at every
  // component representative.
  double n_diameter = 0.0;
  for (std::size_t a = 0; a < n_samples.size(); ++a)
    for (std::size_t b = a + 1; b < n_samples.size(); ++b)
      n_diameter =
          std::max(n_diameter, (n_samples[a].base_point - n_samples[b].base_point).norm());
  const double fiber_sep = std::max(1e-8, cfg.fiber_sep_rel * n_diameter);
  const auto& cloud = tube.start_cloud();
  for (std::size_t c = 0; c < eps_budget.representatives.size(); ++c) {
    const Vector& z =
        cloud[static_cast<std::size_t>(eps_budget.representatives[c])].base_point;
    std::vector<ProjectorResult> fiber;
    std::string note;
    try {
      fiber = fiber_points(tube, n, z, tube.delta_at(z), cfg.fiber_starts, fiber_sep,
                           n_samples);
    } catch (const Error& e) {
      note = e.what();
    }
    std::vector<Vector> pts;
    for (const auto& f : fiber) pts.push_back(f.point);
    cert.fibers.push_back(pts);
    const double cardinality = static_cast<double>(fiber.size());
    cert.injectivity.worst = std::max(cert.injectivity.worst, cardinality);
    cert.surjectivity.worst = std::min(cert.surjectivity.worst, cardinality);
    if (fiber.size() > 1) {
      cert.injectivity.pass = false;
      cert.injectivity.witness = static_cast<int>(c);
      add_witness("injectivity", static_cast<int>(c), fiber[0].point, cardinality, 1.0,
                  "second fiber point at distance " +
                      std::to_string((fiber[1].point - fiber[0].point).norm()));
    }
    if (fiber.empty()) {
      cert.surjectivity.pass = false;
      cert.surjectivity.witness = static_cast<int>(c);
      add_witness("surjectivity", static_cast<int>(c), z, 0.0, 1.0,
                  note.empty() ? "component representative is not hit" : note);
    }
  }

  // (v) properness: vacuous for compact scenes, nested-annuli evidence when
  // the declared region is unbounded.
  const BoundingBox& scene = n.bounding_box();
  if (!scene.unbounded()) {
    cert.properness.note = "compact scene: vacuous";
  } else {
    std::vector<std::pair<double, int>> by_radius;
    for (std::size_t i = 0; i < n_samples.size(); ++i)
      by_radius.emplace_back(n_samples[i].base_point.norm(), static_cast<int>(i));
    std::sort(by_radius.begin(), by_radius.end());
    const std::size_t tail = by_radius.size() / 3;
    for (std::size_t k = by_radius.size() - tail; k < by_radius.size(); ++k) {
      const int i = by_radius[k].second;
      const double eps_here = eps_budget.epsilon(report.points[static_cast<std::size_t>(i)]);
      const double escape = report.dist_to_m[static_cast<std::size_t>(i)];
      cert.properness.worst = std::max(cert.properness.worst, escape - eps_here);
      if (escape >= eps_here) {
        cert.properness.pass = false;
        add_witness("properness", i, report.points[static_cast<std::size_t>(i)], escape,
                    eps_here, "escape distance exceeds epsilon on the outer annulus");
      }
    }
    cert.properness.note = "outer-annulus evidence";
  }

  // Informational: the hypothesis side, |h - id|_1 < epsilon at every sample.
  cert.hypothesis_margin = std::numeric_limits<double>::infinity();
  cert.hypothesis_met = true;
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const double margin = eps_budget.epsilon(report.points[i]) - report.combined[i];
    cert.hypothesis_margin = std::min(cert.hypothesis_margin, margin);
    if (!(margin > 0.0)) cert.hypothesis_met = false;
  }

  cert.pass = cert.containment.pass && cert.local_diffeo.pass && cert.injectivity.pass &&
              cert.surjectivity.pass && cert.properness.pass;
  return cert;
}

}  // namespace tubecert
