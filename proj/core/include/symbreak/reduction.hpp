#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "symbreak/releq.hpp"
#include "symbreak/wittartin.hpp"

namespace symbreak {

/// Integer completion of the subtorus inclusion to a unimodular block
/// [sub | c], realizing T^n = T^r x T^{n-r}.
struct LatticeComplement {
  Eigen::MatrixXi c;  // n x (n - r)
  Mat real() const { return c.cast<double>(); }
};

/// Completes the inclusion lattice via Smith reduction, then shortens the
/// complement columns modulo the sublattice and normalizes signs. Throws
/// std::invalid_argument when the columns do not span a direct summand of
/// Z^n (some elementary divisor != 1), which cannot happen for a single
/// primitive column but can for r >= 2.
LatticeComplement complement_lattice(const SubtorusInclusion& sub);

enum class ReductionMode { Symplectic, Poisson };

/// Local parametrization psi(k, v, c) = act(complement * k, m + b_n v + b_c c)
/// of a neighborhood of the base orbit, transverse to the T^r directions.
///   symplectic: b_n spans A_alpha + V_m, b_c a complement of A_alpha in W,
///               and fiber solves pin the restricted momentum;
///   poisson:    b_n spans W + V_m, b_c is empty, the velocity stays frozen
///               at the base value and the reduced value is H_eps - J^xi.
struct SliceChart {
  RelativeEquilibrium base;
  WittArtinDecomposition wa;
  SubtorusInclusion sub;
  LatticeComplement complement;
  Mat fiber_basis;       // b_n
  Mat constraint_basis;  // b_c (2N x r symplectic, 2N x 0 poisson)
  ReductionMode mode = ReductionMode::Symplectic;
  double radius = 0;     // validity radius for |v|, |c|
  Vec xi_full;           // base velocity in full-torus coordinates
  Vec mu;                // base momentum J(m)
  double velocity_gap = 0;        // distance(xi, image of the inclusion)
  bool velocity_hypothesis = false;  // gap <= 1e-8

  int torus_dim() const { return static_cast<int>(complement.c.cols()); }  // n - r
};

/// Assembles the chart. Symplectic mode refuses (std::invalid_argument)
/// when the base velocity is not in the subtorus algebra to 1e-8 or when
/// the nondegeneracy report is absent or negative; Poisson mode records the
/// velocity gap as a flag instead (the elimination stays well-posed, but
/// mapped points are then certified only as critical points of the
/// augmented Hamiltonian, not as subtorus relative equilibria).
SliceChart build_chart(const Model& m, const RelativeEquilibrium& re,
                       const WittArtinDecomposition& wa,
                       const SubtorusInclusion& sub,
                       const LatticeComplement& complement, ReductionMode mode,
                       const std::optional<NondegeneracyReport>& nondegeneracy);

/// psi(k, v, c); c must be empty in poisson mode.
PhasePoint chart_point(const Model& m, const SliceChart& chart, const Vec& k,
                       const Vec& v, const Vec& c);

struct FiberSolution {
  Vec k;
  double epsilon = 0;
  Vec v_star;
  Vec c_star;       // empty in poisson mode
  PhasePoint x_star;
  double hbar = 0;  // H_eps(x*) (symplectic) or (H_eps - J^xi)(x*) (poisson)
  double residual = std::numeric_limits<double>::infinity();
  int newton_iters = 0;
  bool converged = false;
  bool escaped = false;  // left the chart validity radius
};

/// Newton elimination of the fiber variables at fixed torus coordinate k:
///   symplectic: B^T grad H_eps(psi) = 0 rows over the pushed-forward b_n
///               plus sub^T (J(psi) - mu) = 0, unknowns (v, c);
///   poisson:    B^T grad (H_eps - J^xi)(psi) = 0, unknowns v.
/// Warm starts seed the iteration; divergence is reported in the record.
FiberSolution fiber_solve(const Model& m, const SliceChart& chart, const Vec& k,
                          double eps,
                          const std::optional<FiberSolution>& warm = {},
                          const NewtonOptions& opts = {.max_iters = 60,
                                                       .abs_tol = 1e-12});

/// fiber_solve with an adaptive epsilon ladder from 0 (where v = 0 is exact)
/// used for cold starts and as a fallback when a direct solve fails.
FiberSolution fiber_solve_continued(const Model& m, const SliceChart& chart,
                                    const Vec& k, double eps,
                                    const std::optional<FiberSolution>& warm = {});

struct ReducedFunction {
  ReductionMode mode = ReductionMode::Symplectic;
  double epsilon = 0;
  std::vector<int> grid;               // resolution per torus dimension
  std::vector<FiberSolution> samples;  // lexicographic, first index fastest
  int holes = 0;

  int node_count() const;
  /// lexicographic flat index
  int flat_index(const std::vector<int>& idx) const;
  Vec node_angles(const std::vector<int>& idx) const;
};

/// Samples h_eps over a uniform grid on T^{n-r}, warm-starting each node
/// from its predecessor along the sweep and from the epsilon ladder at row
/// starts. Rows (sweeps over the first torus dimension) are independent, so
/// thread-parallel evaluation gives bitwise-identical results to the serial
/// sweep. Throws std::runtime_error when more than 10% of the nodes fail.
ReducedFunction sample_reduced(const Model& m, const SliceChart& chart,
                               double eps, const std::vector<int>& grid,
                               int threads = 1);

/// CSV with columns k_1..k_d, hbar, residual, newton_iters, v_norm.
void write_reduced_csv(const ReducedFunction& rf, std::ostream& out);

}  // namespace symbreak
