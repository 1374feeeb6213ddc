#include "symbreak/numkernel.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace symbreak {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

Eigen::JacobiSVD<Mat> svd_of(const Mat& a, unsigned options) {
  return Eigen::JacobiSVD<Mat>(a, options);
}

}  // namespace

// ---------------------------------------------------------------------------
// SymplecticStructure
// ---------------------------------------------------------------------------

SymplecticStructure::SymplecticStructure(Mat omega) : omega_(std::move(omega)) {
  if (omega_.rows() != omega_.cols() || omega_.rows() % 2 != 0) {
    throw std::invalid_argument("symplectic form must be square of even dimension");
  }
  const double scale = std::max(1.0, omega_.cwiseAbs().maxCoeff());
  if ((omega_ + omega_.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw std::invalid_argument("symplectic form must be antisymmetric");
  }
  Eigen::FullPivLU<Mat> lu(omega_.transpose());
  if (!lu.isInvertible()) {
    throw std::invalid_argument("symplectic form must be invertible");
  }
  poisson_ = lu.inverse();
}

SymplecticStructure SymplecticStructure::canonical(int half_dim) {
  if (half_dim <= 0) throw std::invalid_argument("half_dim must be positive");
  const int n = half_dim;
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return SymplecticStructure(std::move(omega));
}

double SymplecticStructure::pairing(const Vec& u, const Vec& v) const {
  return u.dot(omega_ * v);
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

SubspaceBasis make_basis(Mat columns, BasisLabel label) {
  if (columns.cols() > columns.rows()) {
    throw std::invalid_argument("basis has more columns than ambient dimension");
  }
  if (columns.cols() > 0) {
    auto svd = svd_of(columns, 0);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
      throw std::invalid_argument("basis columns are numerically rank-deficient");
    }
  }
  return SubspaceBasis{std::move(columns), label};
}

Mat orthonormalize(const Mat& columns, double rel_tol) {
  if (columns.cols() == 0) return columns;
  auto svd = svd_of(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  // rank against an order-one scale: basis columns in this library are unit
  // sized, and a uniformly tiny input (a projection residual) is the zero
  // subspace, not a noise basis
  const double cutoff = rel_tol * std::max(sv(0), 1.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

double span_gap(const Mat& a, const Mat& b) {
  const Mat qa = orthonormalize(a);
  const Mat qb = orthonormalize(b);
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  // sine of the largest principal angle via projection residuals; the
  // cosine route cannot resolve angles below ~1e-8
  const Mat ra = qb - qa * (qa.transpose() * qb);
  const Mat rb = qa - qb * (qb.transpose() * qa);
  const double s = std::max(svd_of(ra, 0).singularValues().maxCoeff(),
                            svd_of(rb, 0).singularValues().maxCoeff());
  return std::min(1.0, s);
}

SubspaceBasis kernel_basis(const Mat& a, double tol) {
  if (!a.allFinite()) throw std::invalid_argument("kernel_basis: non-finite matrix");
  const int n = static_cast<int>(a.cols());
  auto svd = svd_of(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0) {
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol * sv(0)) ++rank;
    }
  }
  SubspaceBasis out;
  out.columns = svd.matrixV().rightCols(n - rank);
  out.label = BasisLabel::Generic;
  return out;
}

SubspaceBasis symplectic_orthogonal(const SubspaceBasis& s,
                                    const SymplecticStructure& j) {
  if (s.ambient_dim() != j.dim()) {
    throw std::invalid_argument("symplectic_orthogonal: dimension mismatch");
  }
  if (s.dim() == 0) {
    SubspaceBasis out;
    out.columns = Mat::Identity(j.dim(), j.dim());
    return out;
  }
  return kernel_basis(s.columns.transpose() * j.omega());
}

SubspaceBasis lagrangian_complement(const SubspaceBasis& t,
                                    const SubspaceBasis& u,
                                    const SymplecticStructure& j,
                                    const std::optional<Mat>& start_complement) {
  const int d = t.dim();
  if (u.dim() != 2 * d) {
    throw std::invalid_argument("lagrangian_complement: container must have twice the dimension of T");
  }
  if (t.ambient_dim() != j.dim() || u.ambient_dim() != j.dim()) {
    throw std::invalid_argument("lagrangian_complement: ambient dimension mismatch");
  }
  const Mat tq = orthonormalize(t.columns);
  const Mat uq = orthonormalize(u.columns);
  // containment: T must project onto itself inside U
  if (((uq * (uq.transpose() * tq)) - tq).norm() > 1e-8 * std::max(1.0, tq.norm())) {
    throw std::invalid_argument("lagrangian_complement: T is not contained in the container");
  }
  const Mat omega_tt = tq.transpose() * j.omega() * tq;
  if (omega_tt.cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("lagrangian_complement: T is not isotropic");
  }
  // complement C of T inside U: orthonormal by default, caller-supplied start
  // otherwise
  Mat c;
  if (start_complement) {
    c = orthonormalize(*start_complement);
    if (((uq * (uq.transpose() * c)) - c).norm() > 1e-8 * std::max(1.0, c.norm())) {
      throw std::invalid_argument("lagrangian_complement: start complement is not inside the container");
    }
  } else {
    c = orthonormalize(uq - tq * (tq.transpose() * uq));
  }
  if (c.cols() != d) {
    throw std::invalid_argument("lagrangian_complement: complement of T in U has wrong dimension");
  }
  const Mat g = c.transpose() * j.omega() * c;  // d x d, antisymmetric
  const Mat p = c.transpose() * j.omega() * tq; // d x d pairing C x T
  auto svd = svd_of(p, 0);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * std::max(sv(0), 1e-300)) {
    throw DomainError("lagrangian_complement: degenerate pairing between complement and T");
  }
  const Mat a = 0.5 * g * p.transpose().partialPivLu().solve(Mat::Identity(d, d));
  Mat w = c + tq * a.transpose();
  SubspaceBasis out;
  out.columns = orthonormalize(w);
  out.label = BasisLabel::OrbitalComplement;
  if (out.dim() != d) {
    throw DomainError("lagrangian_complement: correction collapsed the complement");
  }
  // the result must be isotropic; a failure here means the inputs were not
  // a Lagrangian pair to begin with
  const Mat check = out.columns.transpose() * j.omega() * out.columns;
  if (check.cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("lagrangian_complement: result fails the isotropy check");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Newton
// ---------------------------------------------------------------------------

NewtonResult newton_solve(const ResidualFn& f, const Vec& x0,
                          const NewtonOptions& opts, const JacobianFn& jac) {
  if (opts.abs_tol <= 0 || opts.step_damping <= 0 || opts.step_damping >= 1) {
    throw std::invalid_argument("newton_solve: invalid options");
  }
  NewtonResult result;
  result.x = x0;
  Vec r = f(x0);
  if (!all_finite(r)) {
    result.status = NewtonStatus::NonFinite;
    return result;
  }
  result.residual_norm = r.norm();

  for (int it = 0; it < opts.max_iters; ++it) {
    if (result.residual_norm <= opts.abs_tol) {
      result.converged = true;
      result.status = NewtonStatus::Converged;
      return result;
    }
    Mat jm = jac ? jac(result.x) : fd_jacobian(f, result.x, opts.fd_step);
    Vec step;
    if (opts.rank_policy == RankPolicy::SquareSolve) {
      if (jm.rows() != jm.cols()) {
        throw std::invalid_argument("newton_solve: square-solve requires a square system");
      }
      Eigen::FullPivLU<Mat> lu(jm);
      if (!lu.isInvertible()) {
        result.status = NewtonStatus::SingularJacobian;
        return result;
      }
      step = -lu.solve(r);
    } else {
      auto svd = Eigen::JacobiSVD<Mat>(jm, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      step = -svd.solve(r);
    }
    if (!all_finite(step)) {
      result.status = NewtonStatus::NonFinite;
      return result;
    }

    // backtracking on the residual norm
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vec x_new = result.x + t * step;
      Vec r_new = f(x_new);
      if (all_finite(r_new) && r_new.norm() < result.residual_norm) {
        result.x = std::move(x_new);
        r = std::move(r_new);
        result.residual_norm = r.norm();
        accepted = true;
        break;
      }
      t *= opts.step_damping;
    }
    ++result.iters;
    if (!accepted) {
      result.status = NewtonStatus::StalledLineSearch;
      return result;
    }
  }
  if (result.residual_norm <= opts.abs_tol) {
    result.converged = true;
    result.status = NewtonStatus::Converged;
  } else {
    result.status = NewtonStatus::MaxIterations;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

namespace {

double checked_eval(const std::function<double(const Vec&)>& f, const Vec& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw DomainError("finite differences: non-finite function value");
  }
  return v;
}

Vec fd_gradient_step(const std::function<double(const Vec&)>& f, const Vec& x,
                     double h) {
  const int n = static_cast<int>(x.size());
  Vec g(n);
  Vec xp = x;
  for (int i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    const double fp = checked_eval(f, xp);
    xp(i) = x(i) - h;
    const double fm = checked_eval(f, xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

Mat fd_hessian_step(const std::function<double(const Vec&)>& f, const Vec& x,
                    double h) {
  const int n = static_cast<int>(x.size());
  Mat hess(n, n);
  const double f0 = checked_eval(f, x);
  Vec xp = x;
  for (int i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    const double fp = checked_eval(f, xp);
    xp(i) = x(i) - h;
    const double fm = checked_eval(f, xp);
    xp(i) = x(i);
    hess(i, i) = (fp - 2 * f0 + fm) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      xp(i) = x(i) + h; xp(k) = x(k) + h;
      const double fpp = checked_eval(f, xp);
      xp(k) = x(k) - h;
      const double fpm = checked_eval(f, xp);
      xp(i) = x(i) - h; xp(k) = x(k) + h;
      const double fmp = checked_eval(f, xp);
      xp(k) = x(k) - h;
      const double fmm = checked_eval(f, xp);
      xp(i) = x(i); xp(k) = x(k);
      hess(i, k) = hess(k, i) = (fpp - fpm - fmp + fmm) / (4 * h * h);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                const FdOptions& opts) {
  const double h = opts.step > 0 ? opts.step : 1e-5;
  if (!opts.richardson) return fd_gradient_step(f, x, h);
  const Vec coarse = fd_gradient_step(f, x, h);
  const Vec fine = fd_gradient_step(f, x, h / 2);
  return (4.0 * fine - coarse) / 3.0;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
               const FdOptions& opts) {
  // 5e-4 keeps the second-difference cancellation near 3e-9 for order-one
  // values; 1e-4 would sit right at the 1e-8 accuracy target
  const double h = opts.step > 0 ? opts.step : 5e-4;
  if (!opts.richardson) return fd_hessian_step(f, x, h);
  const Mat coarse = fd_hessian_step(f, x, h);
  const Mat fine = fd_hessian_step(f, x, h / 2);
  return (4.0 * fine - coarse) / 3.0;
}

Mat fd_jacobian(const ResidualFn& f, const Vec& x, double step) {
  const int n = static_cast<int>(x.size());
  Vec xp = x;
  Mat j;
  for (int i = 0; i < n; ++i) {
    xp(i) = x(i) + step;
    Vec fp = f(xp);
    xp(i) = x(i) - step;
    Vec fm = f(xp);
    xp(i) = x(i);
    if (j.size() == 0) j.resize(fp.size(), n);
    j.col(i) = (fp - fm) / (2 * step);
  }
  if (n == 0) j.resize(f(x).size(), 0);
  return j;
}

}  // namespace symbreak
