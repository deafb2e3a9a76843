#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tubecert/retraction.hpp"
#include "tubecert/subspace.hpp"

namespace tubecert {

/// The correspondence h: N -> M. Given either by ambient expressions or,
/// when empty, by the retraction-seeded candidate h := r restricted to N.
struct CorrespondenceMap {
  std::vector<Expression> components;
  bool retraction_seeded() const { return components.empty(); }
};

/// Per-sample closeness of h to the identity in the |.| + |d.| sense, with
/// the derivative term measured as the operator defect of d_x h - id on T_x N.
struct ClosenessReport {
  std::vector<Vector> points;
  std::vector<Vector> images;
  std::vector<double> c0_defect;   // |h(x) - x|
  std::vector<double> c1_defect;   // sup over unit u in T_x N of |d_x h(u) - u|
  std::vector<double> combined;    // c0 + c1, per sample
  std::vector<double> dist_to_m;   // |x - r(x)|, always <= c0
  double c0_max = 0.0;
  double c1_max = 0.0;
  double combined_max = 0.0;
  int worst = -1;
};

ClosenessReport closeness(const TubularNeighborhood& tube_m, const ManifoldSpec& n,
                          const CorrespondenceMap& h, std::span<const TangentFrame> samples);

// ---------------------------------------------------------------------------

struct BudgetConfig {
  int mu_directions = 8;
  int mu_radii = 6;
  bool strict = false;  // doubles directions and radii
  double safety = 0.9;
  double degenerate_tol = 1e-12;
  double linking_radius = 0.0;  // 0 -> 3x median nearest-neighbor distance
  std::uint64_t seed = 0;
};

/// The positive fields the local-diffeomorphism argument needs, with the
/// per-component ball radii q and the regional suprema epsilon0. epsilon is
/// capped at min_i q_i / 32 so that epsilon0 < q/16 holds by construction.
struct EpsilonBudget {
  ScalarField epsilon;
  ScalarField eta;
  ScalarField mu;
  ScalarField derivative_cap;  // 1 / (8 (|d_x r| + 1))
  std::vector<double> q_radius;
  std::vector<double> epsilon0;
  std::vector<int> representatives;  // indices into the tube's start cloud
  double q_cap = 0.0;                // min_i q_i / 32

  struct Stats {
    double eta_min = 0, eta_max = 0;
    double mu_min = 0, mu_max = 0;
    double cap_min = 0, cap_max = 0;
    double epsilon_min = 0, epsilon_max = 0;
  } stats;  // over the evaluation samples
};

/// Evaluates eta, mu, the derivative cap and epsilon at every sample (the
/// fields stay evaluable elsewhere, with caching). Throws BudgetDegenerate
/// when any field underflows the degeneracy tolerance.
EpsilonBudget budget(const TubularNeighborhood& tube, const BoundingBox& region,
                     std::span<const TangentFrame> samples, const BudgetConfig& cfg = {});

// ---------------------------------------------------------------------------

struct Witness {
  std::string clause;
  int sample_index = -1;
  Vector point;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct ClauseResult {
  bool pass = true;
  double worst = 0.0;      // clause-specific extremal value
  double threshold = 0.0;  // the bound it was compared against
  int witness = -1;        // sample index of the extremal value
  std::string note;
};

struct DiffeoCertificate {
  ClauseResult containment;   // in_tube at every N sample
  ClauseResult local_diffeo;  // |d_x r(u) - u| < 1/4 on tangent bases
  ClauseResult injectivity;   // every component fiber has at most one point
  ClauseResult surjectivity;  // every component representative is hit
  ClauseResult properness;    // vacuous on compact scenes, annuli otherwise
  bool hypothesis_met = false;      // informational: |h - id|_1 < epsilon sampled
  double hypothesis_margin = 0.0;   // min over samples of epsilon - combined
  std::vector<Witness> witnesses;   // at least one per failing clause
  std::vector<std::vector<Vector>> fibers;  // per component, the r^{-1}(z_i) points
  bool pass = false;
};

struct CertifyConfig {
  double local_diffeo_threshold = 0.25;
  int fiber_starts = 16;
  double fiber_sep_rel = 1e-4;  // times the N sample diameter
  std::uint64_t seed = 0;
};

DiffeoCertificate certify(const TubularNeighborhood& tube, const ManifoldSpec& n,
                          const ClosenessReport& report, const EpsilonBudget& eps_budget,
                          std::span<const TangentFrame> n_samples,
                          const CertifyConfig& cfg = {});

// ---------------------------------------------------------------------------

/// Solves r(x) = y for x in N along the normal fiber of M at y (normal
/// shooting from multi-offset starts), validating each candidate by
/// projecting it back. Deduplicated candidates within dedupe_sep.
std::vector<ProjectorResult> fiber_points(const TubularNeighborhood& tube_m,
                                          const ManifoldSpec& n, const Vector& y, double spread,
                                          int starts, double dedupe_sep,
                                          std::span<const TangentFrame> n_cloud);

/// The inverse of r restricted to N at y. Throws FiberEmpty / FiberAmbiguous,
/// which refute a previously passed certificate.
Vector invert(const TubularNeighborhood& tube_m, const ManifoldSpec& n, const Vector& y,
              std::span<const TangentFrame> n_cloud, const CertifyConfig& cfg = {});

}  // namespace tubecert
