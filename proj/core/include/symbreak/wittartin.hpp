#pragma once

#include <optional>
#include <utility>

#include "symbreak/model.hpp"

namespace symbreak {

/// Splitting T_m M = V_m + t^n.m + W at a point of a free orbit:
/// `orbit` spans the generator directions, `symplectic_normal` (V_m) is a
/// complement of the orbit inside ker DJ(m) on which the form is
/// nondegenerate, and `orbital_complement` (W) is a Lagrangian complement
/// of the orbit inside (V_m)^omega.
struct WittArtinDecomposition {
  PhasePoint at;
  SubspaceBasis orbit;
  SubspaceBasis symplectic_normal;
  SubspaceBasis orbital_complement;
  Mat momentum_jacobian;  // n x 2N, rows dJ_i(m)
};

/// Deterministic decomposition at m: V_m is the orthonormal complement of
/// the orbit inside ker DJ(m) (any complement works, the form degenerates
/// only along the orbit), W comes from lagrangian_complement. Throws
/// DomainError when the action is not free at m (orbit rank loss) or the
/// momentum Jacobian is rank-deficient.
WittArtinDecomposition decompose(const Model& m, const PhasePoint& at);

/// Randomized admissible choice of (V_m, W) at the same point, used to
/// exercise the independence of downstream verdicts from the splitting.
WittArtinDecomposition decompose_randomized(const Model& m, const PhasePoint& at,
                                            unsigned seed);

/// N_alpha = A_alpha + V_m where A_alpha = {w in W : i^T DJ(m) w = 0}.
/// dim = (n - r) + (2N - 2n). Throws DomainError when A_alpha does not have
/// dimension n - r (momentum Jacobian degenerate on W).
SubspaceBasis nondegeneracy_space(const WittArtinDecomposition& wa,
                                  const SubtorusInclusion& sub);

/// W + V_m, the larger elimination space used by the Poisson-mode result.
SubspaceBasis poisson_nondegeneracy_space(const WittArtinDecomposition& wa);

struct NondegeneracyReport {
  SubspaceBasis space;
  Mat restricted_hessian;
  Vec eigenvalues;               // ascending
  bool nondegenerate = false;    // min |eig| > 1e-8 * max(1, spectral radius)
  std::pair<int, int> signature; // (positives, negatives)
};

/// Restricts D^2(H_0 - J^xi)(m) to the given space and decides the verdict.
/// xi_full is the velocity in full-torus coordinates. Precondition: m is a
/// critical point of the augmented Hamiltonian (norm <= 1e-8), else throws
/// std::invalid_argument.
NondegeneracyReport check_nondegenerate(const Model& m, const PhasePoint& at,
                                        const Vec& xi_full,
                                        const SubspaceBasis& space);

/// Hessian of one momentum component (finite differences of the gradient).
Mat momentum_component_hessian(const Model& m, int component, const PhasePoint& x);

}  // namespace symbreak
