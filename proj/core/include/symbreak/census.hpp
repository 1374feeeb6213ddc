#pragma once

#include <iosfwd>
#include <string>

#include "symbreak/reduction.hpp"

namespace symbreak {

struct CriticalPoint {
  Vec k;                   // torus point, wrapped to [0, 2pi)
  double value = 0;        // hbar at the refined point
  double gradient_norm = 0;
  bool degenerate = false;
  int morse_index = 0;     // negative-eigenvalue count; meaningless when degenerate
  Vec hessian_eigs;        // ascending
  bool near_radius = false;  // fiber solution close to the chart validity edge
};

struct CensusOptions {
  double grad_tol = 1e-10;        // refinement tolerance on the gradient norm
  double degeneracy_rel = 1e-6;   // relative Hessian degeneracy threshold
  double fd_step_gradient = 1e-4;
  double fd_step_hessian = 1e-3;
  double merge_radius = 0;        // 0 -> min(grid spacing / 4, 1e-6)
  int max_refine_iters = 60;
};

struct LocatedPoints {
  std::vector<CriticalPoint> points;
  std::vector<std::string> warnings;  // dropped candidates, merge ambiguities
};

/// Finds the critical points of hbar on T^{n-r}: grid candidates where the
/// finite-difference gradient norm is locally minimal, Newton refinement
/// with fresh fiber solves, lattice-aware deduplication, and Hessian
/// classification. Diverging refinements are dropped with a warning.
LocatedPoints locate_critical_points(const Model& m, const SliceChart& chart,
                                     const ReducedFunction& rf,
                                     const CensusOptions& opts = {});

struct MappedRe {
  RelativeEquilibrium re;
  Vec recovered_velocity;      // over the subtorus (symplectic) / full torus (poisson)
  double velocity_gap = 0;     // distance to the base velocity's projection
  double momentum_deviation = 0;  // |i^T (J(x) - mu)|
  bool accepted = false;
};

/// Final fiber solve at the critical point plus velocity recovery. The
/// acceptance gate demands augmented-gradient residual <= 1e-8 and, in
/// symplectic mode, restricted momentum within 1e-8 of i* mu. A failed gate
/// is reported, never silently dropped.
MappedRe map_back(const Model& m, const SliceChart& chart,
                  const CriticalPoint& cp, double eps);

struct CensusReport {
  double eps = 0;
  ReductionMode mode = ReductionMode::Symplectic;
  int torus_dim = 0;  // n - r
  std::vector<CriticalPoint> points;
  int count = 0;
  int ls_bound = 0;     // n - r + 1
  int morse_bound = 0;  // 2^{n-r}
  bool all_nondegenerate = false;
  bool ls_satisfied = false;
  bool morse_satisfied = false;  // meaningful only when all_nondegenerate
  int euler_sum = 0;             // sum of (-1)^index over nondegenerate points
  bool euler_defined = false;
  std::vector<MappedRe> mapped;
  bool velocity_hypothesis = false;  // from the chart
  bool re_certified = false;  // mapped points certified as subtorus REs
  std::vector<std::string> warnings;
};

/// Bound checks and map-back for located critical points. The report states
/// bound satisfaction and observed counts, never exact-count claims.
CensusReport census_report(const Model& m, const SliceChart& chart,
                           const LocatedPoints& located, double eps);

/// Stable JSON rendering (field order fixed) and a CSV of the points.
std::string census_to_json(const CensusReport& report);
void write_census_csv(const CensusReport& report, std::ostream& out);

struct ChartPipeline {
  RelativeEquilibrium base;
  WittArtinDecomposition wa;
  NondegeneracyReport nondegeneracy;
  LatticeComplement complement;
  SliceChart chart;
};

/// Everything up to the chart: base relative equilibrium of H_0 over the
/// full torus (seed and momentum target default to the model's bundled
/// hints), Witt-Artin splitting, the mode-appropriate nondegeneracy check,
/// and the chart itself. Throws where the persistence hypotheses fail, exactly
/// as build_chart does.
ChartPipeline prepare_chart(const Model& m, const SubtorusInclusion& sub,
                            ReductionMode mode,
                            const std::optional<PhasePoint>& seed = {},
                            const std::optional<Vec>& mu_target = {});

}  // namespace symbreak
