#pragma once

#include <iosfwd>

#include "symbreak/releq.hpp"

namespace symbreak {

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  double energy_drift = 0;   // max |H_eps(x(t)) - H_eps(x(0))|
  Vec momentum_drift;        // per-component max |J_i(x(t)) - J_i(x(0))|
  bool domain_exit = false;  // truncated at the chart boundary
  bool step_underflow = false;
};

/// Adaptive Dormand-Prince 5(4) integration of xdot = P grad H_eps(x) with
/// mixed absolute/relative local error tolerance `tol`. States are recorded
/// at every accepted step. Domain exit truncates the trajectory with a flag
/// rather than throwing.
Trajectory integrate(const Model& m, double eps, const PhasePoint& x0,
                     double horizon, double tol = 1e-12);

/// min over theta in T^r of |x - act(i theta, x_ref)|, grid-scanned and
/// locally refined. r = 0 reduces to the plain distance.
double orbit_distance(const Model& m, const PhasePoint& x,
                      const PhasePoint& x_ref, const SubtorusInclusion& sub);

/// orbit_distance plus the minimizing subtorus angle.
std::pair<double, Vec> orbit_projection(const Model& m, const PhasePoint& x,
                                        const PhasePoint& x_ref,
                                        const SubtorusInclusion& sub);

struct VerifyOptions {
  double horizon = 50;
  double integrator_tol = 1e-12;
  double orbit_tol = 1e-6;
  double momentum_tol = 1e-8;
  double rate_rel_tol = 1e-4;
  int max_samples = 200;
};

struct ReVerification {
  double max_orbit_distance = 0;
  double restricted_momentum_drift = 0;
  double energy_drift = 0;
  double advance_rate = 0;       // fitted angular rate along the orbit (r = 1)
  double rate_rel_error = 0;
  bool rate_checked = false;
  bool orbit_ok = false;
  bool momentum_ok = false;
  bool pass = false;
};

/// Integrates from re.x and confirms relative-equilibrium behavior: the
/// trajectory stays on the subtorus orbit of re.x, the restricted momentum
/// is conserved, and (r = 1) the observed angular advance rate matches the
/// recorded velocity.
ReVerification verify_re(const Model& m, double eps,
                         const RelativeEquilibrium& re,
                         const SubtorusInclusion& sub,
                         const VerifyOptions& opts = {});

/// CSV with columns t, x_1..x_2N, H, J_1..J_n.
void write_trajectory_csv(const Model& m, double eps, const Trajectory& traj,
                          std::ostream& out);

}  // namespace symbreak
