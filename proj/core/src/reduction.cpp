#include "symbreak/reduction.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace symbreak {

// ---------------------------------------------------------------------------
// Lattice complement via Smith reduction
// ---------------------------------------------------------------------------

namespace {

using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

// Reduces b to quasi-diagonal form by unimodular row/column operations,
// accumulating the inverse of the row-operation product so that the last
// n - r columns of p_inv complete the column lattice of the input.
void smith_reduce(IMat& b, IMat& p_inv) {
  const long n = b.rows(), r = b.cols();
  for (long t = 0; t < std::min(n, r); ++t) {
    for (;;) {
      // move the smallest nonzero of the trailing block to (t, t)
      long pi = -1, pj = -1;
      long long best = 0;
      for (long i = t; i < n; ++i) {
        for (long j = t; j < r; ++j) {
          const long long a = std::llabs(b(i, j));
          if (a != 0 && (best == 0 || a < best)) {
            best = a;
            pi = i;
            pj = j;
          }
        }
      }
      if (pi < 0) return;  // trailing block is zero
      if (pi != t) {
        b.row(pi).swap(b.row(t));
        p_inv.col(pi).swap(p_inv.col(t));
      }
      if (pj != t) b.col(pj).swap(b.col(t));
      if (b(t, t) < 0) {
        b.row(t) *= -1;
        p_inv.col(t) *= -1;
      }
      bool clean = true;
      for (long i = t + 1; i < n; ++i) {
        const long long q = b(i, t) / b(t, t);
        if (q != 0) {
          b.row(i) -= q * b.row(t);
          p_inv.col(t) += q * p_inv.col(i);
        }
        if (b(i, t) != 0) clean = false;
      }
      for (long j = t + 1; j < r; ++j) {
        const long long q = b(t, j) / b(t, t);
        if (q != 0) b.col(j) -= q * b.col(t);
        if (b(t, j) != 0) clean = false;
      }
      if (clean) break;
    }
  }
}

}  // namespace

LatticeComplement complement_lattice(const SubtorusInclusion& sub) {
  const int n = sub.torus_rank();
  const int r = sub.rank();
  IMat b = sub.matrix.cast<long long>();
  IMat p_inv = IMat::Identity(n, n);
  smith_reduce(b, p_inv);
  for (int t = 0; t < r; ++t) {
    if (std::llabs(b(t, t)) != 1) {
      throw std::invalid_argument(
          "complement_lattice: subtorus columns do not span a direct summand "
          "of the lattice (elementary divisor != 1)");
    }
  }

  Eigen::MatrixXi c(n, n - r);
  for (int j = 0; j < n - r; ++j) {
    for (int i = 0; i < n; ++i) c(i, j) = static_cast<int>(p_inv(i, r + j));
  }

  // shorten each complement column modulo the sublattice (keeps [sub | c]
  // unimodular), then normalize the sign of the leading entry
  if (r > 0) {
    const Mat a = sub.real();
    const Mat gram_inv = (a.transpose() * a).inverse();
    for (int j = 0; j < n - r; ++j) {
      const Vec col = c.col(j).cast<double>();
      const Vec z = gram_inv * (a.transpose() * col);
      Eigen::VectorXi best = c.col(j);
      double best_norm = col.squaredNorm();
      // try the integer roundings around the least-squares reduction
      const int combos = 1 << r;
      for (int mask = 0; mask < combos; ++mask) {
        Eigen::VectorXi zi(r);
        for (int t = 0; t < r; ++t) {
          zi(t) = static_cast<int>((mask >> t) & 1 ? std::ceil(z(t)) : std::floor(z(t)));
        }
        Eigen::VectorXi cand = c.col(j) - sub.matrix * zi;
        const double norm = cand.cast<double>().squaredNorm();
        if (norm < best_norm - 1e-12 ||
            (std::abs(norm - best_norm) <= 1e-12 && mask != 0)) {
          best = cand;
          best_norm = norm;
        }
      }
      c.col(j) = best;
    }
  }
  for (int j = 0; j < n - r; ++j) {
    for (int i = 0; i < n; ++i) {
      if (c(i, j) != 0) {
        if (c(i, j) < 0) c.col(j) *= -1;
        break;
      }
    }
  }
  return LatticeComplement{std::move(c)};
}

// ---------------------------------------------------------------------------
// Slice chart
// ---------------------------------------------------------------------------

namespace {

double velocity_gap_to_subtorus(const Vec& xi, const SubtorusInclusion& sub) {
  if (sub.rank() == 0) return xi.norm();
  const Mat inc = sub.real();
  Eigen::JacobiSVD<Mat> svd(inc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec coords = svd.solve(xi);
  return (xi - inc * coords).norm();
}

Vec full_torus_velocity(const RelativeEquilibrium& re, const SubtorusInclusion& sub,
                        int n) {
  if (static_cast<int>(re.velocity.size()) == n) return re.velocity;
  if (static_cast<int>(re.velocity.size()) == sub.rank()) {
    return sub.real() * re.velocity;
  }
  throw std::invalid_argument("build_chart: base velocity has unexpected length");
}

}  // namespace

SliceChart build_chart(const Model& m, const RelativeEquilibrium& re,
                       const WittArtinDecomposition& wa,
                       const SubtorusInclusion& sub,
                       const LatticeComplement& complement, ReductionMode mode,
                       const std::optional<NondegeneracyReport>& nondegeneracy) {
  if (!re.converged || re.residual > 1e-8) {
    throw std::invalid_argument("build_chart: base point is not a converged relative equilibrium");
  }
  const int n = m.torus_rank;

  SliceChart chart;
  chart.base = re;
  chart.wa = wa;
  chart.sub = sub;
  chart.complement = complement;
  chart.mode = mode;
  chart.xi_full = full_torus_velocity(re, sub, n);
  chart.mu = re.momentum_value;
  chart.velocity_gap = velocity_gap_to_subtorus(chart.xi_full, sub);
  chart.velocity_hypothesis = chart.velocity_gap <= 1e-8;

  if (!nondegeneracy.has_value()) {
    throw std::invalid_argument(
        "build_chart: a nondegeneracy report for the elimination space is required");
  }
  if (!nondegeneracy->nondegenerate) {
    throw std::invalid_argument(
        "build_chart: the restricted Hessian at the base point is degenerate; "
        "the fiber elimination is not well-posed");
  }

  if (mode == ReductionMode::Symplectic) {
    if (!chart.velocity_hypothesis) {
      throw std::invalid_argument(
          "build_chart: the base velocity is not in the subtorus algebra; "
          "use poisson mode for a velocity-frozen search");
    }
    const SubspaceBasis n_alpha = nondegeneracy_space(wa, sub);
    chart.fiber_basis = n_alpha.columns;
    // complement of A_alpha inside W spans the momentum-transverse slice
    const Mat& w = wa.orbital_complement.columns;
    const Mat proj = chart.fiber_basis * (chart.fiber_basis.transpose() * w);
    chart.constraint_basis = orthonormalize(w - proj);
    if (chart.constraint_basis.cols() != sub.rank()) {
      throw DomainError("build_chart: momentum-transverse slice has wrong dimension");
    }
  } else {
    chart.fiber_basis = poisson_nondegeneracy_space(wa).columns;
    chart.constraint_basis = Mat(m.dim(), 0);
  }

  // validity radius: start at 10% of the base scale and shrink until the
  // probe corners stay inside the chart domain
  double radius = 0.1 * (1.0 + re.x.norm());
  Mat dirs(m.dim(), chart.fiber_basis.cols() + chart.constraint_basis.cols());
  dirs << chart.fiber_basis, chart.constraint_basis;
  for (int shrink = 0; shrink < 24; ++shrink) {
    bool ok = true;
    for (int j = 0; j < dirs.cols() && ok; ++j) {
      for (double s : {1.0, -1.0}) {
        if (!m.in_domain(re.x + s * radius * dirs.col(j))) {
          ok = false;
          break;
        }
      }
    }
    if (ok) break;
    radius *= 0.5;
  }
  if (radius < 1e-6) {
    throw DomainError("build_chart: no usable chart radius at the base point");
  }
  chart.radius = radius;
  return chart;
}

PhasePoint chart_point(const Model& m, const SliceChart& chart, const Vec& k,
                       const Vec& v, const Vec& c) {
  Vec theta = Vec::Zero(m.torus_rank);
  if (chart.torus_dim() > 0) theta = chart.complement.real() * k;
  PhasePoint slice = chart.base.x + chart.fiber_basis * v;
  if (c.size() > 0) slice += chart.constraint_basis * c;
  return act(m, theta, slice);
}

// ---------------------------------------------------------------------------
// Fiber elimination
// ---------------------------------------------------------------------------

FiberSolution fiber_solve(const Model& m, const SliceChart& chart, const Vec& k,
                          double eps, const std::optional<FiberSolution>& warm,
                          const NewtonOptions& opts) {
  const int nv = static_cast<int>(chart.fiber_basis.cols());
  const int nc = static_cast<int>(chart.constraint_basis.cols());
  const bool symplectic = chart.mode == ReductionMode::Symplectic;
  const Mat inc = chart.sub.real();
  const Vec mu_r = inc.transpose() * chart.mu;

  Vec theta = Vec::Zero(m.torus_rank);
  if (chart.torus_dim() > 0) theta = chart.complement.real() * k;

  auto residual = [&](const Vec& u) -> Vec {
    Vec out(nv + nc);
    try {
      const PhasePoint slice_pt = chart.base.x + chart.fiber_basis * u.head(nv) +
                                  (nc > 0 ? Vec(chart.constraint_basis * u.tail(nc))
                                          : Vec(Vec::Zero(m.dim())));
      if (!m.in_domain(slice_pt)) throw DomainError("slice point left domain");
      const PhasePoint x = act(m, theta, slice_pt);
      const Mat push = act_differential(m, theta, slice_pt);
      Vec grad = evaluate_gradient(m, eps, x);
      if (!symplectic) {
        grad -= momentum_combination_gradient(m, chart.xi_full, x);
      }
      out.head(nv) = (push * chart.fiber_basis).transpose() * grad;
      if (nc > 0) {
        out.tail(nc) = inc.transpose() * momentum(m, x) - mu_r;
      }
    } catch (const DomainError&) {
      out.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
  };

  Vec u0 = Vec::Zero(nv + nc);
  if (warm && warm->converged) {
    u0.head(nv) = warm->v_star;
    if (nc > 0 && warm->c_star.size() == nc) u0.tail(nc) = warm->c_star;
  }

  const NewtonResult sol = newton_solve(residual, u0, opts);

  FiberSolution fs;
  fs.k = k;
  fs.epsilon = eps;
  fs.v_star = sol.x.head(nv);
  fs.c_star = nc > 0 ? Vec(sol.x.tail(nc)) : Vec();
  fs.residual = sol.residual_norm;
  fs.newton_iters = sol.iters;
  fs.converged = sol.converged;
  if (sol.converged) {
    const PhasePoint slice_pt = chart.base.x + chart.fiber_basis * fs.v_star +
                                (nc > 0 ? Vec(chart.constraint_basis * fs.c_star)
                                        : Vec(Vec::Zero(m.dim())));
    fs.x_star = act(m, theta, slice_pt);
    fs.hbar = evaluate(m, eps, fs.x_star);
    if (!symplectic) {
      fs.hbar -= chart.xi_full.dot(momentum(m, fs.x_star));
    }
    fs.escaped = fs.v_star.norm() > chart.radius ||
                 (nc > 0 && fs.c_star.norm() > chart.radius);
  }
  return fs;
}

FiberSolution fiber_solve_continued(const Model& m, const SliceChart& chart,
                                    const Vec& k, double eps,
                                    const std::optional<FiberSolution>& warm) {
  FiberSolution direct = fiber_solve(m, chart, k, eps, warm);
  if (direct.converged) return direct;

  // adaptive epsilon ladder from 0, doubling back on failures
  std::optional<FiberSolution> carry;
  double reached = 0;
  double step = eps;
  int splits = 0;
  while (std::abs(reached - eps) > 1e-15 * std::max(1.0, std::abs(eps))) {
    double target = reached + step;
    if ((eps > 0 && target > eps) || (eps < 0 && target < eps)) target = eps;
    FiberSolution fs = fiber_solve(m, chart, k, target, carry);
    if (fs.converged) {
      carry = fs;
      reached = target;
      step = std::min(std::abs(step) * 2, std::abs(eps - reached)) * (eps >= 0 ? 1 : -1);
      if (step == 0) break;
    } else {
      step /= 2;
      if (++splits > 40) break;
    }
  }
  if (carry && std::abs(carry->epsilon - eps) <= 1e-15 * std::max(1.0, std::abs(eps))) {
    return *carry;
  }
  return direct;  // report the failed direct solve
}

// ---------------------------------------------------------------------------
// Grid sampling
// ---------------------------------------------------------------------------

int ReducedFunction::node_count() const {
  int total = 1;
  for (int g : grid) total *= g;
  return total;
}

int ReducedFunction::flat_index(const std::vector<int>& idx) const {
  int flat = 0, stride = 1;
  for (std::size_t d = 0; d < grid.size(); ++d) {
    flat += idx[d] * stride;
    stride *= grid[d];
  }
  return flat;
}

Vec ReducedFunction::node_angles(const std::vector<int>& idx) const {
  Vec k(static_cast<long>(grid.size()));
  for (std::size_t d = 0; d < grid.size(); ++d) {
    k(static_cast<long>(d)) = 2 * M_PI * idx[d] / grid[d];
  }
  return k;
}

ReducedFunction sample_reduced(const Model& m, const SliceChart& chart,
                               double eps, const std::vector<int>& grid,
                               int threads) {
  const int d = chart.torus_dim();
  if (static_cast<int>(grid.size()) != d) {
    throw std::invalid_argument("sample_reduced: grid rank must equal n - r");
  }
  for (int g : grid) {
    if (g < 8) throw std::invalid_argument("sample_reduced: resolution must be >= 8");
  }

  ReducedFunction rf;
  rf.mode = chart.mode;
  rf.epsilon = eps;
  rf.grid = grid;

  if (d == 0) {
    rf.samples.push_back(fiber_solve_continued(m, chart, Vec(), eps));
    if (!rf.samples.back().converged) {
      throw std::runtime_error("sample_reduced: the single fiber solve failed");
    }
    return rf;
  }

  rf.samples.resize(static_cast<std::size_t>(rf.node_count()));
  const int n0 = grid[0];
  int rows = 1;
  for (std::size_t t = 1; t < grid.size(); ++t) rows *= grid[t];

  // a row sweeps the first torus dimension at fixed remaining indices; rows
  // are chained internally (warm starts) and independent of one another, so
  // the schedule below is deterministic for any thread count
  auto solve_row = [&](int row) {
    std::vector<int> idx(grid.size(), 0);
    int rest = row;
    for (std::size_t t = 1; t < grid.size(); ++t) {
      idx[t] = rest % grid[t];
      rest /= grid[t];
    }
    std::optional<FiberSolution> warm;
    for (int i0 = 0; i0 < n0; ++i0) {
      idx[0] = i0;
      const Vec k = rf.node_angles(idx);
      FiberSolution fs = warm ? fiber_solve(m, chart, k, eps, warm)
                              : fiber_solve_continued(m, chart, k, eps);
      if (!fs.converged) fs = fiber_solve_continued(m, chart, k, eps);
      warm = fs.converged ? std::optional<FiberSolution>(fs) : std::nullopt;
      rf.samples[static_cast<std::size_t>(rf.flat_index(idx))] = std::move(fs);
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || rows == 1) {
    for (int row = 0; row < rows; ++row) solve_row(row);
  } else {
    std::vector<std::thread> pool;
    const int workers = std::min(threads, rows);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int row = w; row < rows; row += workers) solve_row(row);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& s : rf.samples) {
    if (!s.converged) ++rf.holes;
  }
  if (rf.holes * 10 > rf.node_count()) {
    throw std::runtime_error(
        "sample_reduced: " + std::to_string(rf.holes) + " of " +
        std::to_string(rf.node_count()) +
        " fiber solves failed; the chart radius or the epsilon step is too large");
  }
  return rf;
}

void write_reduced_csv(const ReducedFunction& rf, std::ostream& out) {
  const int d = static_cast<int>(rf.grid.size());
  for (int t = 0; t < d; ++t) out << "k_" << (t + 1) << ",";
  out << "hbar,residual,newton_iters,v_norm\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& s : rf.samples) {
    for (int t = 0; t < d; ++t) out << num(s.k(t)) << ",";
    out << num(s.hbar) << "," << num(s.residual) << "," << s.newton_iters << ","
        << num(s.v_star.norm()) << "\n";
  }
}

}  // namespace symbreak
