#include "symbreak/dynverify.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace symbreak {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,     0, 500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0};
constexpr double kB4[7] = {5179.0 / 57600,    0,           7571.0 / 16695,
                           393.0 / 640,       -92097.0 / 339200,
                           187.0 / 2100,      1.0 / 40};

}  // namespace

Trajectory integrate(const Model& m, double eps, const PhasePoint& x0,
                     double horizon, double tol) {
  if (!m.in_domain(x0)) throw DomainError("integrate: start outside domain");
  if (horizon <= 0) throw std::invalid_argument("integrate: horizon must be positive");

  const Mat& poisson = m.structure.poisson_tensor();
  auto field = [&](const PhasePoint& x) -> PhasePoint {
    return poisson * evaluate_gradient(m, eps, x);
  };

  Trajectory traj;
  traj.times.push_back(0);
  traj.states.push_back(x0);

  const int n = m.torus_rank;
  const double h0 = evaluate(m, eps, x0);
  Vec j0(n);
  for (int i = 0; i < n; ++i) j0(i) = m.momentum_components[i](x0);
  traj.momentum_drift = Vec::Zero(n);

  double t = 0;
  double h = std::min(1e-2, horizon / 10);
  PhasePoint x = x0;
  std::array<PhasePoint, 7> k;
  bool last_reject_domain = false;

  while (t < horizon) {
    if (h < 1e-14 * std::max(1.0, t)) {
      // a vanishing step against the chart boundary is a domain exit
      if (last_reject_domain) traj.domain_exit = true;
      else traj.step_underflow = true;
      break;
    }
    if (t + h > horizon) h = horizon - t;

    bool rejected = false;
    PhasePoint x5, x4;
    try {
      k[0] = field(x);
      for (int s = 1; s < 7; ++s) {
        PhasePoint xs = x;
        for (int q = 0; q < s; ++q) xs += h * kA[s][q] * k[q];
        if (!m.in_domain(xs)) throw DomainError("stage outside domain");
        k[s] = field(xs);
      }
      x5 = x;
      x4 = x;
      for (int s = 0; s < 7; ++s) {
        x5 += h * kB5[s] * k[s];
        x4 += h * kB4[s] * k[s];
      }
      if (!x5.allFinite()) rejected = true;
      last_reject_domain = false;
    } catch (const DomainError&) {
      rejected = true;
      last_reject_domain = true;
    }

    if (!rejected) {
      double err = 0;
      for (int i = 0; i < x.size(); ++i) {
        const double scale = tol + tol * std::max(std::abs(x(i)), std::abs(x5(i)));
        const double e = (x5(i) - x4(i)) / scale;
        err += e * e;
      }
      err = std::sqrt(err / x.size());
      if (err <= 1.0) {
        t += h;
        x = x5;
        if (!m.in_domain(x)) {
          traj.domain_exit = true;
          break;
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.energy_drift =
            std::max(traj.energy_drift, std::abs(evaluate(m, eps, x) - h0));
        for (int i = 0; i < n; ++i) {
          traj.momentum_drift(i) = std::max(
              traj.momentum_drift(i), std::abs(m.momentum_components[i](x) - j0(i)));
        }
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-300, -0.2)));
        continue;
      }
      h *= std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    } else {
      h *= 0.25;
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Orbit distance
// ---------------------------------------------------------------------------

std::pair<double, Vec> orbit_projection(const Model& m, const PhasePoint& x,
                                        const PhasePoint& x_ref,
                                        const SubtorusInclusion& sub) {
  const int r = sub.rank();
  if (r == 0) return {(x - x_ref).norm(), Vec()};
  const Mat inc = sub.real();

  auto dist_sq = [&](const Vec& theta) {
    return (x - m.action(inc * theta, x_ref)).squaredNorm();
  };

  // coarse scan, then damped Newton on the squared distance
  const int res = r == 1 ? 256 : 32;
  Vec best = Vec::Zero(r);
  double best_val = dist_sq(best);
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  for (;;) {
    Vec theta(r);
    for (int i = 0; i < r; ++i) theta(i) = 2 * M_PI * idx[static_cast<std::size_t>(i)] / res;
    const double v = dist_sq(theta);
    if (v < best_val) {
      best_val = v;
      best = theta;
    }
    int c = 0;
    while (c < r && ++idx[static_cast<std::size_t>(c)] == res) idx[static_cast<std::size_t>(c++)] = 0;
    if (c == r) break;
  }

  Vec theta = best;
  double val = best_val;
  const double h = 1e-5;
  for (int it = 0; it < 60; ++it) {
    Vec g(r);
    Mat hess(r, r);
    for (int a = 0; a < r; ++a) {
      Vec up = theta, dn = theta;
      up(a) += h;
      dn(a) -= h;
      const double fu = dist_sq(up), fd = dist_sq(dn);
      g(a) = (fu - fd) / (2 * h);
      hess(a, a) = (fu - 2 * val + fd) / (h * h);
      for (int b = a + 1; b < r; ++b) {
        Vec pp = theta, pm = theta, mp = theta, mm = theta;
        pp(a) += h; pp(b) += h;
        pm(a) += h; pm(b) -= h;
        mp(a) -= h; mp(b) += h;
        mm(a) -= h; mm(b) -= h;
        hess(a, b) = hess(b, a) =
            (dist_sq(pp) - dist_sq(pm) - dist_sq(mp) + dist_sq(mm)) / (4 * h * h);
      }
    }
    if (g.norm() < 1e-14) break;
    Eigen::FullPivLU<Mat> lu(hess);
    Vec step = lu.isInvertible() ? Vec(-lu.solve(g)) : Vec(-0.1 * g);
    double tstep = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 12; ++ls) {
      const Vec cand = theta + tstep * step;
      const double v = dist_sq(cand);
      if (v < val) {
        theta = cand;
        val = v;
        moved = true;
        break;
      }
      tstep *= 0.5;
    }
    if (!moved) break;
  }
  return {std::sqrt(std::max(0.0, val)), theta};
}

double orbit_distance(const Model& m, const PhasePoint& x,
                      const PhasePoint& x_ref, const SubtorusInclusion& sub) {
  return orbit_projection(m, x, x_ref, sub).first;
}

// ---------------------------------------------------------------------------
// Relative-equilibrium verification
// ---------------------------------------------------------------------------

ReVerification verify_re(const Model& m, double eps,
                         const RelativeEquilibrium& re,
                         const SubtorusInclusion& sub,
                         const VerifyOptions& opts) {
  if (re.residual > 1e-8) {
    throw std::invalid_argument("verify_re: record is not a converged relative equilibrium");
  }
  const Trajectory traj = integrate(m, eps, re.x, opts.horizon, opts.integrator_tol);

  ReVerification v;
  v.energy_drift = traj.energy_drift;

  const int r = sub.rank();
  const Mat inc = sub.real();
  const std::size_t count = traj.states.size();
  const std::size_t stride = std::max<std::size_t>(1, count / static_cast<std::size_t>(opts.max_samples));

  const Vec j0 = inc.transpose() * momentum(m, traj.states.front());
  std::vector<double> ts, angles;
  for (std::size_t i = 0; i < count; i += stride) {
    const PhasePoint& xt = traj.states[i];
    auto [dist, theta] = orbit_projection(m, xt, re.x, sub);
    v.max_orbit_distance = std::max(v.max_orbit_distance, dist);
    v.restricted_momentum_drift =
        std::max(v.restricted_momentum_drift,
                 r > 0 ? (inc.transpose() * momentum(m, xt) - j0).cwiseAbs().maxCoeff() : 0.0);
    if (r == 1) {
      ts.push_back(traj.times[i]);
      angles.push_back(theta(0));
    }
  }

  v.orbit_ok = v.max_orbit_distance <= opts.orbit_tol &&
               !traj.domain_exit && !traj.step_underflow;
  v.momentum_ok = v.restricted_momentum_drift <= opts.momentum_tol;

  if (r == 1 && ts.size() >= 3) {
    // unwrap the angle sequence and fit a rate; the record's velocity is
    // expressed in subtorus coordinates when its length is r
    double expected;
    if (static_cast<int>(re.velocity.size()) == r) {
      expected = re.velocity(0);
    } else {
      Eigen::JacobiSVD<Mat> svd(inc, Eigen::ComputeThinU | Eigen::ComputeThinV);
      expected = svd.solve(re.velocity)(0);
    }
    std::vector<double> unwrapped = angles;
    for (std::size_t i = 1; i < unwrapped.size(); ++i) {
      double d = unwrapped[i] - unwrapped[i - 1];
      while (d > M_PI) d -= 2 * M_PI;
      while (d < -M_PI) d += 2 * M_PI;
      unwrapped[i] = unwrapped[i - 1] + d;
    }
    double st = 0, sa = 0, stt = 0, sta = 0;
    const auto npts = static_cast<double>(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sa += unwrapped[i];
      stt += ts[i] * ts[i];
      sta += ts[i] * unwrapped[i];
    }
    const double denom = npts * stt - st * st;
    v.advance_rate = denom > 0 ? (npts * sta - st * sa) / denom : 0;
    if (std::abs(expected) > 1e-10) {
      v.rate_rel_error = std::abs(v.advance_rate - expected) / std::abs(expected);
      v.rate_checked = true;
    }
  }

  v.pass = v.orbit_ok && v.momentum_ok &&
           (!v.rate_checked || v.rate_rel_error <= opts.rate_rel_tol);
  return v;
}

void write_trajectory_csv(const Model& m, double eps, const Trajectory& traj,
                          std::ostream& out) {
  const int dim = m.dim(), n = m.torus_rank;
  out << "t";
  for (int i = 1; i <= dim; ++i) out << ",x_" << i;
  out << ",H";
  for (int i = 1; i <= n; ++i) out << ",J_" << i;
  out << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    out << num(traj.times[s]);
    for (int i = 0; i < dim; ++i) out << "," << num(traj.states[s](i));
    out << "," << num(evaluate(m, eps, traj.states[s]));
    for (int i = 0; i < n; ++i) out << "," << num(m.momentum_components[i](traj.states[s]));
    out << "\n";
  }
}

}  // namespace symbreak
