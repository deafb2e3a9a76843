#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tubecert/expression.hpp"
#include "tubecert/types.hpp"

namespace tubecert {

struct SmoothnessClass {
  int order = 2;         // ignored when infinite
  bool infinite = true;  // declared, never verified
};

/// Level-set representation F(x) = 0 with F: R^n -> R^{n-m}. The Jacobian is
/// computed by central differences unless analytic rows are supplied.
struct ImplicitRep {
  std::vector<Expression> constraints;
  std::vector<std::vector<Expression>> jacobian;  // optional, (n-m) rows of n entries
  Vector bound_args;  // extra trailing arguments (e.g. a frozen family time)
};

struct ParametricPatch {
  BoundingBox domain;           // m-dimensional parameter box
  std::vector<Expression> map;  // psi: R^m -> R^n
  std::vector<bool> periodic;   // per parameter dimension; wraps instead of clamping
};

struct ParametricRep {
  std::vector<ParametricPatch> patches;
  Vector bound_args;
};

/// Certified point samples with orthonormal tangent frames.
struct SampledRep {
  std::vector<TangentFrame> frames;
};

enum class RepresentationKind { Implicit, Parametric, Sampled };

struct ManifoldTolerances {
  double on_manifold_tol = 1e-8;  // absolute, on the scaled constraint residual
  double rank_tol = 1e-7;         // relative to the largest singular value
};

/// An immutable submanifold of R^n. All queries are const and reentrant.
class ManifoldSpec {
 public:
  ManifoldSpec(int ambient_dim, int intrinsic_dim, ImplicitRep rep, BoundingBox box,
               SmoothnessClass smoothness = {});
  ManifoldSpec(int ambient_dim, int intrinsic_dim, ParametricRep rep, BoundingBox box,
               SmoothnessClass smoothness = {});
  ManifoldSpec(int ambient_dim, int intrinsic_dim, SampledRep rep, BoundingBox box,
               SmoothnessClass smoothness = {});

  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  int codim() const { return ambient_dim_ - intrinsic_dim_; }
  RepresentationKind kind() const { return kind_; }
  const BoundingBox& bounding_box() const { return box_; }
  const SmoothnessClass& smoothness() const { return smoothness_; }
  const ManifoldTolerances& tolerances() const { return tol_; }

  const ImplicitRep& implicit_rep() const;
  const ParametricRep& parametric_rep() const;
  const SampledRep& sampled_rep() const;
  int patch_count() const;

  /// F(x) for implicit manifolds.
  Vector constraint_value(const Vector& x) const;
  /// dF(x), analytic if supplied, else central differences.
  Matrix constraint_jacobian(const Vector& x) const;
  /// Membership residual |F(x)| with each row scaled by 1/max(1, |grad F_i|).
  double scaled_constraint_residual(const Vector& x) const;

  /// Allocation-light kernels for solver loops; out must be presized.
  void constraint_value_into(const Vector& x, Vector& out) const;
  void constraint_jacobian_into(const Vector& x, Matrix& out) const;
  void patch_value_into(int patch, const Vector& q, Vector& out) const;
  void patch_jacobian_into(int patch, const Vector& q, Matrix& out) const;

  /// psi(q) and d psi(q) for a parametric patch.
  Vector patch_value(int patch, const Vector& q) const;
  Matrix patch_jacobian(int patch, const Vector& q) const;
  /// Wraps periodic parameter dimensions into the domain box.
  Vector wrap_param(int patch, Vector q) const;

 private:
  int ambient_dim_;
  int intrinsic_dim_;
  RepresentationKind kind_;
  std::variant<ImplicitRep, ParametricRep, SampledRep> rep_;
  BoundingBox box_;
  SmoothnessClass smoothness_;
  ManifoldTolerances tol_;
};

// ---------------------------------------------------------------------------
// Pointwise differential data

/// Orthonormal tangent/normal bases at an on-manifold point. For implicit
/// manifolds the tangent space is the kernel of dF(x), extracted by SVD.
/// Throws NotOnManifold / RankDeficient.
TangentFrame tangent_space(const ManifoldSpec& m, const Vector& x);

/// Frame from a parametric patch point (no membership solve needed).
TangentFrame frame_at_param(const ManifoldSpec& m, int patch, const Vector& q);

/// On-manifold test at the given absolute tolerance (defaults to the spec's
/// tolerance). Parametric and sampled representations use a nearest-point
/// backsolve / tangent-plane residual.
bool on_manifold(const ManifoldSpec& m, const Vector& x, double tol = -1.0);

/// Distance from x to the manifold's local model (backsolve for parametric,
/// scaled residual proxy for implicit, tangent-plane distance for sampled).
double membership_distance(const ManifoldSpec& m, const Vector& x);

// ---------------------------------------------------------------------------
// Single-start projection (the multi-start tube solver builds on this)

struct ProjectorConfig {
  int max_iter = 100;
  double residual_tol = 1e-10;
  double step_tol = 1e-12;
};

struct ProjectorResult {
  bool converged = false;
  Vector point;     // candidate foot point on the manifold
  double distance = 0.0;
  double residual = 0.0;  // stationarity residual at exit
  int iterations = 0;
  int patch = -1;   // parametric bookkeeping for warm restarts
  Vector param;
};

/// Gauss-Newton on the stationarity system (p on M, x - p orthogonal to
/// T_p M) from a single ambient start.
ProjectorResult project_single_implicit(const ManifoldSpec& m, const Vector& x, const Vector& p0,
                                        const ProjectorConfig& cfg = {});

/// Gauss-Newton in chart coordinates from a single parameter start.
ProjectorResult project_single_parametric(const ManifoldSpec& m, const Vector& x, int patch,
                                          const Vector& q0, const ProjectorConfig& cfg = {});

/// Closest tangent-plane foot point for sampled manifolds (exact, no solve).
ProjectorResult project_sampled(const ManifoldSpec& m, const Vector& x);

/// Nearest-point backsolve over all patches, seeded from a coarse
/// deterministic parameter grid. Used for membership and matched-point tests.
ProjectorResult nearest_point_parametric(const ManifoldSpec& m, const Vector& x,
                                         int grid_per_dim = 16,
                                         const ProjectorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Sampling and components

/// Deterministic manifold sampling: rejection from the bounding box followed
/// by projection for implicit manifolds, direct chart draws (round-robin over
/// patches) for parametric ones, and a seeded subset for sampled data.
/// Throws SamplingFailed if more than 90% of projection attempts fail.
std::vector<TangentFrame> sample(const ManifoldSpec& m, int budget, std::uint64_t seed);

struct ComponentPartition {
  std::vector<int> label;            // per input frame, dense ids in [0, count)
  std::vector<int> representative;   // one frame index per component
  int count = 0;
};

/// Graph components under |x_i - x_j| < linking_radius.
ComponentPartition connected_components(std::span<const TangentFrame> frames,
                                        double linking_radius);

/// Median nearest-neighbor distance; 3x this is the default linking radius.
double median_nn_distance(std::span<const TangentFrame> frames);

}  // namespace tubecert
