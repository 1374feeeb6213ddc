#include "symbreak/census.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace symbreak {

namespace {

double wrap_angle(double a) {
  a = std::fmod(a, 2 * M_PI);
  if (a < 0) a += 2 * M_PI;
  return a;
}

Vec wrap_torus(Vec k) {
  for (int i = 0; i < k.size(); ++i) k(i) = wrap_angle(k(i));
  return k;
}

/// distance on the torus: componentwise wrap of the difference to (-pi, pi]
double lattice_distance(const Vec& a, const Vec& b) {
  double sq = 0;
  for (int i = 0; i < a.size(); ++i) {
    double d = std::fmod(a(i) - b(i), 2 * M_PI);
    if (d > M_PI) d -= 2 * M_PI;
    if (d < -M_PI) d += 2 * M_PI;
    sq += d * d;
  }
  return std::sqrt(sq);
}

struct HbarEval {
  const Model& m;
  const SliceChart& chart;
  double eps;
  std::optional<FiberSolution> warm;

  double operator()(const Vec& k, bool* ok, FiberSolution* out = nullptr) {
    FiberSolution fs = fiber_solve(m, chart, k, eps, warm);
    if (!fs.converged) fs = fiber_solve_continued(m, chart, k, eps);
    if (!fs.converged) {
      *ok = false;
      return 0;
    }
    *ok = true;
    warm = fs;
    if (out) *out = fs;
    return fs.hbar;
  }
};

}  // namespace

LocatedPoints locate_critical_points(const Model& m, const SliceChart& chart,
                                     const ReducedFunction& rf,
                                     const CensusOptions& opts) {
  LocatedPoints result;
  const int d = static_cast<int>(rf.grid.size());

  if (d == 0) {
    // trivial torus T^0: the single fiber solution is the census
    CriticalPoint cp;
    cp.k = Vec();
    cp.value = rf.samples.front().hbar;
    cp.gradient_norm = 0;
    cp.degenerate = false;
    cp.morse_index = 0;
    cp.hessian_eigs = Vec();
    cp.near_radius = rf.samples.front().v_star.norm() > 0.8 * chart.radius;
    result.points.push_back(cp);
    return result;
  }

  // gradient norm on the periodic grid from the sampled values
  const int total = rf.node_count();
  std::vector<double> grad_norm(static_cast<std::size_t>(total),
                                std::numeric_limits<double>::infinity());
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  auto advance = [&](std::vector<int>& ix) {
    for (int t = 0; t < d; ++t) {
      if (++ix[static_cast<std::size_t>(t)] < rf.grid[static_cast<std::size_t>(t)]) return true;
      ix[static_cast<std::size_t>(t)] = 0;
    }
    return false;
  };
  auto sample_ok = [&](const std::vector<int>& ix) {
    return rf.samples[static_cast<std::size_t>(rf.flat_index(ix))].converged;
  };

  do {
    if (!sample_ok(idx)) continue;
    double sq = 0;
    bool usable = true;
    for (int t = 0; t < d && usable; ++t) {
      std::vector<int> up = idx, dn = idx;
      const int res = rf.grid[static_cast<std::size_t>(t)];
      up[static_cast<std::size_t>(t)] = (idx[static_cast<std::size_t>(t)] + 1) % res;
      dn[static_cast<std::size_t>(t)] = (idx[static_cast<std::size_t>(t)] + res - 1) % res;
      if (!sample_ok(up) || !sample_ok(dn)) {
        usable = false;
        break;
      }
      const double h = 2 * M_PI / res;
      const double g =
          (rf.samples[static_cast<std::size_t>(rf.flat_index(up))].hbar -
           rf.samples[static_cast<std::size_t>(rf.flat_index(dn))].hbar) /
          (2 * h);
      sq += g * g;
    }
    if (usable) grad_norm[static_cast<std::size_t>(rf.flat_index(idx))] = std::sqrt(sq);
  } while (advance(idx));

  // candidates: local minima of the gradient norm over the 3^d neighborhood
  std::vector<std::vector<int>> candidates;
  std::fill(idx.begin(), idx.end(), 0);
  do {
    const double here = grad_norm[static_cast<std::size_t>(rf.flat_index(idx))];
    if (!std::isfinite(here)) continue;
    bool is_min = true;
    std::vector<int> nb(static_cast<std::size_t>(d), -1);
    std::function<void(int)> visit = [&](int t) {
      if (!is_min) return;
      if (t == d) {
        bool same = true;
        std::vector<int> j(static_cast<std::size_t>(d));
        for (int q = 0; q < d; ++q) {
          const int res = rf.grid[static_cast<std::size_t>(q)];
          j[static_cast<std::size_t>(q)] =
              (idx[static_cast<std::size_t>(q)] + nb[static_cast<std::size_t>(q)] + res) % res;
          if (nb[static_cast<std::size_t>(q)] != 0) same = false;
        }
        if (same) return;
        const double other = grad_norm[static_cast<std::size_t>(rf.flat_index(j))];
        if (std::isfinite(other) && other < here) is_min = false;
        return;
      }
      for (int s = -1; s <= 1; ++s) {
        nb[static_cast<std::size_t>(t)] = s;
        visit(t + 1);
      }
    };
    visit(0);
    if (is_min) candidates.push_back(idx);
  } while (advance(idx));

  // refinement: Newton on the finite-difference gradient of hbar
  const double merge_radius =
      opts.merge_radius > 0
          ? opts.merge_radius
          : std::min(2 * M_PI / (*std::max_element(rf.grid.begin(), rf.grid.end())) / 4,
                     1e-6);

  std::vector<CriticalPoint> refined;
  std::vector<FiberSolution> refined_fs;
  for (const auto& cand : candidates) {
    HbarEval eval{m, chart, rf.epsilon,
                  rf.samples[static_cast<std::size_t>(rf.flat_index(cand))]};
    Vec k = rf.node_angles(cand);

    auto fd_grad = [&](const Vec& at, bool* ok) {
      Vec g(d);
      for (int t = 0; t < d; ++t) {
        Vec up = at, dn = at;
        up(t) += opts.fd_step_gradient;
        dn(t) -= opts.fd_step_gradient;
        bool oku = false, okd = false;
        const double fu = eval(up, &oku);
        const double fd = eval(dn, &okd);
        if (!oku || !okd) {
          *ok = false;
          return g;
        }
        g(t) = (fu - fd) / (2 * opts.fd_step_gradient);
      }
      *ok = true;
      return g;
    };
    auto fd_hess = [&](const Vec& at, bool* ok) {
      Mat h(d, d);
      const double s = opts.fd_step_hessian;
      bool all_ok = true;
      auto val = [&](const Vec& p) {
        bool o = false;
        const double v = eval(p, &o);
        if (!o) all_ok = false;
        return v;
      };
      const double f0 = val(at);
      for (int a = 0; a < d; ++a) {
        Vec up = at, dn = at;
        up(a) += s;
        dn(a) -= s;
        h(a, a) = (val(up) - 2 * f0 + val(dn)) / (s * s);
        for (int b = a + 1; b < d; ++b) {
          Vec pp = at, pm = at, mp = at, mm = at;
          pp(a) += s; pp(b) += s;
          pm(a) += s; pm(b) -= s;
          mp(a) -= s; mp(b) += s;
          mm(a) -= s; mm(b) -= s;
          h(a, b) = h(b, a) = (val(pp) - val(pm) - val(mp) + val(mm)) / (4 * s * s);
        }
      }
      *ok = all_ok;
      return Mat(0.5 * (h + h.transpose()));
    };

    bool ok = false;
    Vec g = fd_grad(k, &ok);
    if (!ok) {
      result.warnings.push_back("candidate dropped: fiber solves failed near the start");
      continue;
    }
    bool converged = g.norm() <= opts.grad_tol;
    for (int it = 0; it < opts.max_refine_iters && !converged; ++it) {
      Mat h = fd_hess(k, &ok);
      if (!ok) break;
      Eigen::FullPivLU<Mat> lu(h);
      Vec step;
      if (lu.isInvertible()) {
        step = -lu.solve(g);
      } else {
        step = -h.completeOrthogonalDecomposition().solve(g);
      }
      // damped acceptance on the gradient norm
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 10; ++ls) {
        Vec k_new = k + t * step;
        bool okn = false;
        Vec g_new = fd_grad(k_new, &okn);
        if (okn && g_new.norm() < g.norm()) {
          k = k_new;
          g = g_new;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      converged = g.norm() <= opts.grad_tol;
    }
    if (!converged) {
      result.warnings.push_back("candidate dropped: refinement did not reach the gradient tolerance");
      continue;
    }

    CriticalPoint cp;
    cp.k = wrap_torus(k);
    cp.gradient_norm = g.norm();
    Mat h = fd_hess(k, &ok);
    if (!ok) {
      result.warnings.push_back("candidate dropped: Hessian evaluation failed");
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    cp.hessian_eigs = eig.eigenvalues();
    const double radius_sp = cp.hessian_eigs.cwiseAbs().maxCoeff();
    const double threshold = opts.degeneracy_rel * std::max(1.0, radius_sp);
    cp.degenerate = cp.hessian_eigs.cwiseAbs().minCoeff() <= threshold;
    cp.morse_index = 0;
    for (int i = 0; i < cp.hessian_eigs.size(); ++i) {
      if (cp.hessian_eigs(i) < 0) ++cp.morse_index;
    }
    FiberSolution fs_final;
    bool okv = false;
    HbarEval feval{m, chart, rf.epsilon, {}};
    cp.value = feval(cp.k, &okv, &fs_final);
    if (!okv) {
      result.warnings.push_back("candidate dropped: final fiber solve failed");
      continue;
    }
    cp.near_radius = fs_final.v_star.norm() > 0.8 * chart.radius;
    refined.push_back(std::move(cp));
    refined_fs.push_back(std::move(fs_final));
  }

  // lattice-aware deduplication
  std::vector<bool> taken(refined.size(), false);
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (taken[i]) continue;
    for (std::size_t j = i + 1; j < refined.size(); ++j) {
      if (taken[j]) continue;
      const double dist = lattice_distance(refined[i].k, refined[j].k);
      if (dist <= merge_radius) {
        taken[j] = true;
      } else if (dist <= 2 * merge_radius) {
        std::ostringstream os;
        os << "duplicate-merge ambiguity: points " << dist
           << " apart with merge radius " << merge_radius;
        result.warnings.push_back(os.str());
      }
    }
    result.points.push_back(refined[i]);
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              for (int i = 0; i < a.k.size(); ++i) {
                if (a.k(i) != b.k(i)) return a.k(i) < b.k(i);
              }
              return false;
            });
  return result;
}

// ---------------------------------------------------------------------------
// Map back to phase space
// ---------------------------------------------------------------------------

MappedRe map_back(const Model& m, const SliceChart& chart,
                  const CriticalPoint& cp, double eps) {
  MappedRe out;
  const FiberSolution fs = fiber_solve_continued(m, chart, cp.k, eps);
  if (!fs.converged) {
    out.accepted = false;
    out.re.converged = false;
    out.re.epsilon = eps;
    return out;
  }
  const Mat inc = chart.sub.real();

  out.re.x = fs.x_star;
  out.re.epsilon = eps;
  out.re.converged = true;
  out.re.momentum_value = momentum(m, fs.x_star);
  out.momentum_deviation =
      (inc.transpose() * (out.re.momentum_value - chart.mu)).norm();

  if (chart.mode == ReductionMode::Symplectic) {
    const VelocityFit fit = recover_velocity(m, eps, fs.x_star, chart.sub);
    out.re.velocity = fit.eta;
    out.re.residual = fit.residual;
    out.recovered_velocity = fit.eta;
    // compare against the base velocity expressed in subtorus coordinates
    if (chart.sub.rank() > 0) {
      Eigen::JacobiSVD<Mat> svd(inc, Eigen::ComputeThinU | Eigen::ComputeThinV);
      out.velocity_gap = (fit.eta - svd.solve(chart.xi_full)).norm();
    } else {
      out.velocity_gap = 0;
    }
    out.accepted = fit.residual <= 1e-8 && out.momentum_deviation <= 1e-8;
  } else {
    // velocity frozen at the base value: residual of the augmented gradient
    const Vec aug = evaluate_gradient(m, eps, fs.x_star) -
                    momentum_combination_gradient(m, chart.xi_full, fs.x_star);
    out.re.velocity = chart.xi_full;
    out.re.residual = aug.norm();
    const VelocityFit fit =
        recover_velocity(m, eps, fs.x_star, SubtorusInclusion::identity(m.torus_rank));
    out.recovered_velocity = fit.eta;
    out.velocity_gap = (fit.eta - chart.xi_full).norm();
    out.accepted = aug.norm() <= 1e-8;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

CensusReport census_report(const Model& m, const SliceChart& chart,
                           const LocatedPoints& located, double eps) {
  CensusReport report;
  report.eps = eps;
  report.mode = chart.mode;
  report.torus_dim = chart.torus_dim();
  report.points = located.points;
  report.warnings = located.warnings;
  report.count = static_cast<int>(located.points.size());
  report.ls_bound = chart.torus_dim() + 1;
  report.morse_bound = 1 << chart.torus_dim();
  report.all_nondegenerate = true;
  for (const auto& p : report.points) {
    if (p.degenerate) report.all_nondegenerate = false;
  }
  report.ls_satisfied = report.count >= report.ls_bound;
  report.morse_satisfied =
      report.all_nondegenerate && report.count >= report.morse_bound;
  report.euler_defined = report.all_nondegenerate;
  report.euler_sum = 0;
  for (const auto& p : report.points) {
    if (!p.degenerate) report.euler_sum += (p.morse_index % 2 == 0) ? 1 : -1;
  }
  report.velocity_hypothesis = chart.velocity_hypothesis;
  report.re_certified = chart.mode == ReductionMode::Symplectic
                            ? true
                            : chart.velocity_hypothesis;
  for (const auto& p : report.points) {
    report.mapped.push_back(map_back(m, chart, p, eps));
  }
  return report;
}

namespace {

nlohmann::ordered_json vec_to_json(const Vec& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string census_to_json(const CensusReport& report) {
  nlohmann::ordered_json j;
  j["eps"] = report.eps;
  j["mode"] = report.mode == ReductionMode::Symplectic ? "symplectic" : "poisson";
  j["torus_dim"] = report.torus_dim;
  j["count"] = report.count;
  j["ls_bound"] = report.ls_bound;
  j["morse_bound"] = report.morse_bound;
  j["all_nondegenerate"] = report.all_nondegenerate;
  j["ls_satisfied"] = report.ls_satisfied;
  j["morse_satisfied"] = report.morse_satisfied;
  j["euler_sum"] = report.euler_sum;
  j["euler_defined"] = report.euler_defined;
  j["velocity_hypothesis"] = report.velocity_hypothesis;
  j["re_certified"] = report.re_certified;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : report.points) {
    nlohmann::ordered_json pj;
    pj["k"] = vec_to_json(p.k);
    pj["value"] = p.value;
    pj["gradient_norm"] = p.gradient_norm;
    pj["morse_index"] =
        p.degenerate ? nlohmann::ordered_json("degenerate")
                     : nlohmann::ordered_json(p.morse_index);
    pj["hessian_eigs"] = vec_to_json(p.hessian_eigs);
    pj["near_radius"] = p.near_radius;
    j["points"].push_back(pj);
  }
  j["mapped"] = nlohmann::ordered_json::array();
  for (const auto& mp : report.mapped) {
    nlohmann::ordered_json mj;
    mj["x"] = vec_to_json(mp.re.x);
    mj["velocity"] = vec_to_json(mp.re.velocity);
    mj["momentum"] = vec_to_json(mp.re.momentum_value);
    mj["residual"] = mp.re.residual;
    mj["eps"] = mp.re.epsilon;
    mj["recovered_velocity"] = vec_to_json(mp.recovered_velocity);
    mj["velocity_gap"] = mp.velocity_gap;
    mj["momentum_deviation"] = mp.momentum_deviation;
    mj["accepted"] = mp.accepted;
    j["mapped"].push_back(mj);
  }
  j["warnings"] = report.warnings;
  return j.dump(2);
}

ChartPipeline prepare_chart(const Model& m, const SubtorusInclusion& sub,
                            ReductionMode mode,
                            const std::optional<PhasePoint>& seed,
                            const std::optional<Vec>& mu_target) {
  PhasePoint seed_x = seed.value_or(m.re_seed);
  if (seed_x.size() == 0) {
    throw std::invalid_argument(
        "prepare_chart: no seed given and the model carries no bundled one");
  }
  FindReOptions opts;
  if (mu_target) {
    opts.mu_target = *mu_target;
  } else if (m.re_momentum.size() == m.torus_rank) {
    opts.mu_target = m.re_momentum;
  }

  ChartPipeline p;
  p.base = find_re(m, 0.0, std::nullopt, seed_x, Vec::Zero(m.torus_rank), opts);
  if (!p.base.converged) {
    throw std::runtime_error("prepare_chart: base relative equilibrium search failed");
  }
  p.wa = decompose(m, p.base.x);
  const auto space = mode == ReductionMode::Symplectic
                         ? nondegeneracy_space(p.wa, sub)
                         : poisson_nondegeneracy_space(p.wa);
  p.nondegeneracy = check_nondegenerate(m, p.base.x, p.base.velocity, space);
  p.complement = complement_lattice(sub);
  p.chart = build_chart(m, p.base, p.wa, sub, p.complement, mode, p.nondegeneracy);
  return p;
}

void write_census_csv(const CensusReport& report, std::ostream& out) {
  const int d = report.torus_dim;
  for (int t = 0; t < d; ++t) out << "k_" << (t + 1) << ",";
  out << "value,gradient_norm,morse_index";
  for (int t = 0; t < d; ++t) out << ",eig_" << (t + 1);
  out << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& p : report.points) {
    for (int t = 0; t < d; ++t) out << num(p.k(t)) << ",";
    out << num(p.value) << "," << num(p.gradient_norm) << ",";
    if (p.degenerate) out << "degenerate";
    else out << p.morse_index;
    for (int t = 0; t < d; ++t) out << "," << num(p.hessian_eigs(t));
    out << "\n";
  }
}

}  // namespace symbreak
