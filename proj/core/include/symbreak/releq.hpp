#pragma once

#include <optional>

#include "symbreak/model.hpp"

namespace symbreak {

/// A located relative equilibrium: critical point of the augmented
/// Hamiltonian H_eps - J^xi. `velocity` lives in R^g for the group the
/// search ran over (g = n for the full torus, g = r for a subtorus, empty
/// when the velocity was held fixed). `residual` is the augmented-gradient
/// norm alone, momentum and gauge rows excluded.
struct RelativeEquilibrium {
  PhasePoint x;
  Vec velocity;
  Vec momentum_value;  // J(x), length n, recomputed at the solution
  double residual = std::numeric_limits<double>::infinity();
  double epsilon = 0;
  bool converged = false;
  int iters = 0;
};

struct FindReOptions {
  /// Momentum target over the group (length = group rank). When absent the
  /// momentum level is left free and extra gauge rows pin the drift along
  /// the group's momentum gradients at the seed.
  std::optional<Vec> mu_target;
  /// Freeze the velocity at this full-torus value (length n) instead of
  /// solving for it; gauge rows then cover only the invariance group of the
  /// frozen system (the subtorus passed as `group`).
  std::optional<Vec> fixed_velocity;
  NewtonOptions newton{.max_iters = 80, .abs_tol = 1e-12};
};

/// Minimum-norm Newton search for a relative equilibrium near seed_x.
/// `group` selects the symmetry: std::nullopt means the full torus T^n,
/// otherwise the given subtorus. Orbit degeneracy is removed by gauge rows
/// <x - seed_x, generator_a(seed_x)> = 0 rather than a bordered system.
/// Non-convergence is reported through the record, never thrown; a
/// converged point that left the chart domain throws DomainError.
RelativeEquilibrium find_re(const Model& m, double eps,
                            const std::optional<SubtorusInclusion>& group,
                            const PhasePoint& seed_x, const Vec& seed_xi,
                            const FindReOptions& opts = {});

struct VelocityFit {
  Vec eta;                // least-squares velocity over the subtorus, R^r
  double residual = 0;    // remaining augmented-gradient norm
  bool rank_ok = true;    // generator gradients had full rank at x
};

/// Least-squares solve of grad H_eps(x) = sum_a eta_a grad (J i)_a(x).
/// x is accepted as a T^r-relative equilibrium when residual <= tolerance;
/// with r = 0 the fit is empty and residual = |grad H_eps(x)|.
VelocityFit recover_velocity(const Model& m, double eps, const PhasePoint& x,
                             const SubtorusInclusion& sub);

}  // namespace symbreak
