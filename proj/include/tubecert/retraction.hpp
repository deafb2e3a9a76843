#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tubecert/manifold.hpp"
#include "tubecert/types.hpp"

namespace tubecert {

struct SolverConfig {
  int max_iter = 100;
  double residual_tol = 1e-10;
  double step_tol = 1e-12;
  int multistart = 8;             // nearest start-cloud frames per projection
  double ambiguity_base = 1e-6;   // ambiguity_tol = base * (1 + dist)
  double jet_step = 1e-3;         // FD step for d_x r, scaled by max(1, |x|)
  double jet_instability_tol = 1e-4;

  ProjectorConfig projector() const { return {max_iter, residual_tol, step_tol}; }
};

struct ReachConfig {
  double step = 0.0;        // probe grid spacing; 0 derives 0.05 * box half-diagonal
  double max_radius = 0.0;  // largest probe; 0 derives the box half-diagonal
  double probe_tol = 1e-4;  // allowed return distance from the probe's source
};

/// The tube (U, r): a manifold, a positive radius field delta on it, a
/// numerically certified lower bound for the tubular radius, and the solver
/// machinery (start cloud + Gauss-Newton config) evaluating r and d_x r.
/// Immutable; all queries are const and reentrant.
class TubularNeighborhood {
 public:
  TubularNeighborhood(std::shared_ptr<const ManifoldSpec> manifold, ScalarField delta,
                      SolverConfig solver, std::vector<TangentFrame> start_cloud,
                      double reach_lower_bound);

  const ManifoldSpec& manifold() const { return *manifold_; }
  std::shared_ptr<const ManifoldSpec> manifold_ptr() const { return manifold_; }
  const ScalarField& delta() const { return delta_; }
  double delta_at(const Vector& on_manifold_point) const { return delta_(on_manifold_point); }
  double reach_lower_bound() const { return reach_; }
  const SolverConfig& solver() const { return solver_; }
  const std::vector<TangentFrame>& start_cloud() const { return cloud_; }

  /// Indices of the k start-cloud frames nearest to x, deterministic order.
  std::vector<int> nearest_cloud(const Vector& x, int k) const;

 private:
  std::shared_ptr<const ManifoldSpec> manifold_;
  ScalarField delta_;
  SolverConfig solver_;
  std::vector<TangentFrame> cloud_;
  double reach_;
};

struct TubeBuildOptions {
  int cloud_budget = 192;
  int reach_probe_budget = 64;
  bool estimate_reach = true;  // required when delta is "auto"
  ReachConfig reach;
  SolverConfig solver;
  std::uint64_t seed = 0;
};

/// Builds the start cloud, certifies a reach lower bound by normal probing,
/// and resolves delta ("auto" -> constant reach/2 when no field is supplied).
TubularNeighborhood make_tube(std::shared_ptr<const ManifoldSpec> manifold,
                              std::optional<ScalarField> delta, const TubeBuildOptions& opt = {});

/// Nearest-point projection r(x): multi-start Gauss-Newton, global best among
/// converged candidates. Throws NoConvergence when every start fails and
/// AmbiguousProjection when two converged minima have equal distance but
/// separated foot points (x is at or beyond the medial axis).
Vector project(const TubularNeighborhood& tube, const Vector& x);

/// Projection with solver detail (foot point, distance, chart bookkeeping).
ProjectorResult project_detail(const TubularNeighborhood& tube, const Vector& x);

/// Warm restart from a previous nearby projection; falls back to the full
/// multi-start when the single warm start fails.
ProjectorResult project_from_hint(const TubularNeighborhood& tube, const Vector& x,
                                  const ProjectorResult& hint);

/// First-order data of r at x: value, the n x n derivative d_x r by central
/// differences with one Richardson level, and its operator norm.
struct RetractionJet {
  Vector input_point;
  Vector value;
  Matrix derivative;
  double operator_norm = 0.0;
  ProjectorResult base;  // warm-start handle for follow-up queries
};

RetractionJet jet(const TubularNeighborhood& tube, const Vector& x);

/// Single-level central difference jet: cheaper, used for continuity probes
/// where 1e-3 accuracy suffices.
RetractionJet jet_fast(const TubularNeighborhood& tube, const Vector& x);

/// Tube membership dist(x, M) < delta(r(x)).
bool in_tube(const TubularNeighborhood& tube, const Vector& x);

/// Largest probe offset t (on an ascending grid) such that every normal probe
/// base +- t nu from every sample projects back to its source within
/// probe_tol, halved as a safety factor. Returns 0 if the smallest probe
/// already fails.
double estimate_reach(const TubularNeighborhood& tube, std::span<const TangentFrame> samples,
                      int probe_budget, const ReachConfig& rc = {});

struct BatchRow {
  Vector input;
  Vector foot;     // NaN-filled when not converged
  double distance = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

/// Batch projection in input order; per-row failures are recorded, not thrown.
std::vector<BatchRow> project_batch(const TubularNeighborhood& tube, const Matrix& points);

}  // namespace tubecert
