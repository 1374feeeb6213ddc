#include "symbreak/releq.hpp"

#include <cmath>

namespace symbreak {

namespace {

Vec momentum_in_group(const Model& m, const Mat& inc, const PhasePoint& x) {
  return inc.transpose() * momentum(m, x);
}

}  // namespace

RelativeEquilibrium find_re(const Model& m, double eps,
                            const std::optional<SubtorusInclusion>& group,
                            const PhasePoint& seed_x, const Vec& seed_xi,
                            const FindReOptions& opts) {
  const int dim = m.dim();
  const int n = m.torus_rank;
  const Mat inc = group ? group->real() : Mat(Mat::Identity(n, n));
  const int g = static_cast<int>(inc.cols());
  const bool fixed = opts.fixed_velocity.has_value();

  if (static_cast<int>(seed_x.size()) != dim) {
    throw std::invalid_argument("find_re: seed has wrong dimension");
  }
  if (!m.in_domain(seed_x)) throw DomainError("find_re: seed outside domain");
  if (!fixed && static_cast<int>(seed_xi.size()) != g) {
    throw std::invalid_argument("find_re: seed velocity length must match group rank");
  }
  if (opts.mu_target && static_cast<int>(opts.mu_target->size()) != g) {
    throw std::invalid_argument("find_re: momentum target length must match group rank");
  }
  if (fixed && static_cast<int>(opts.fixed_velocity->size()) != n) {
    throw std::invalid_argument("find_re: fixed velocity must have full torus length");
  }

  // gauge rows: group generators at the seed; momentum-drift rows pin the
  // level when no target is given (the solution manifold is otherwise
  // velocity-rank dimensions too large)
  Mat gauge_rows(0, dim);
  {
    std::vector<Vec> rows;
    for (int a = 0; a < g; ++a) {
      rows.push_back(generator(m, inc.col(a), seed_x));
    }
    if (!opts.mu_target && !fixed) {
      for (int a = 0; a < g; ++a) {
        rows.push_back(momentum_combination_gradient(m, inc.col(a), seed_x));
      }
    }
    gauge_rows.resize(static_cast<long>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) gauge_rows.row(static_cast<long>(i)) = rows[i];
  }

  const int unknowns = dim + (fixed ? 0 : g);
  const int rows_total = dim + (opts.mu_target ? g : 0) + static_cast<int>(gauge_rows.rows());

  auto augmented_gradient = [&](const PhasePoint& x, const Vec& xi_group) -> Vec {
    Vec grad = evaluate_gradient(m, eps, x);
    if (fixed) {
      grad -= momentum_combination_gradient(m, *opts.fixed_velocity, x);
    } else {
      grad -= momentum_combination_gradient(m, inc * xi_group, x);
    }
    return grad;
  };

  auto residual = [&](const Vec& z) -> Vec {
    const PhasePoint x = z.head(dim);
    const Vec xi_group = fixed ? Vec() : Vec(z.tail(g));
    Vec r(rows_total);
    try {
      if (!m.in_domain(x)) throw DomainError("outside");
      int at = 0;
      r.segment(at, dim) = augmented_gradient(x, xi_group);
      at += dim;
      if (opts.mu_target) {
        r.segment(at, g) = momentum_in_group(m, inc, x) - *opts.mu_target;
        at += g;
      }
      r.segment(at, gauge_rows.rows()) = gauge_rows * (x - seed_x);
    } catch (const DomainError&) {
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return r;
  };

  Vec z0(unknowns);
  z0.head(dim) = seed_x;
  if (!fixed) z0.tail(g) = seed_xi;

  NewtonOptions nopts = opts.newton;
  nopts.rank_policy = RankPolicy::PseudoInverse;
  const NewtonResult sol = newton_solve(residual, z0, nopts);

  RelativeEquilibrium re;
  re.x = sol.x.head(dim);
  re.velocity = fixed ? *opts.fixed_velocity : Vec(sol.x.tail(g));
  re.epsilon = eps;
  re.converged = sol.converged;
  re.iters = sol.iters;
  if (sol.converged && !m.in_domain(re.x)) {
    throw DomainError("find_re: converged point left the chart domain");
  }
  if (m.in_domain(re.x)) {
    re.momentum_value = momentum(m, re.x);
    re.residual = augmented_gradient(re.x, fixed ? Vec() : Vec(sol.x.tail(g))).norm();
  }
  return re;
}

VelocityFit recover_velocity(const Model& m, double eps, const PhasePoint& x,
                             const SubtorusInclusion& sub) {
  if (!m.in_domain(x)) throw DomainError("recover_velocity: point outside domain");
  const Mat inc = sub.real();
  const int r = sub.rank();
  const Vec grad = evaluate_gradient(m, eps, x);

  VelocityFit fit;
  if (r == 0) {
    fit.eta = Vec();
    fit.residual = grad.norm();
    return fit;
  }
  Mat gens(m.dim(), r);
  for (int a = 0; a < r; ++a) {
    gens.col(a) = momentum_combination_gradient(m, inc.col(a), x);
  }
  Eigen::JacobiSVD<Mat> svd(gens, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fit.rank_ok = sv(sv.size() - 1) > 1e-10 * sv(0);
  fit.eta = svd.solve(grad);
  fit.residual = (grad - gens * fit.eta).norm();
  return fit;
}

}  // namespace symbreak
