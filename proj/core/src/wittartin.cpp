#include "symbreak/wittartin.hpp"

#include <Eigen/Eigenvalues>
#include <random>

namespace symbreak {

namespace {

Mat orbit_basis(const Model& m, const Mat& dj) {
  // generators X_{J_i} = P grad J_i, assembled from the Jacobian rows
  return m.structure.poisson_tensor() * dj.transpose();
}

WittArtinDecomposition assemble(const Model& m, const PhasePoint& at,
                                const Mat* v_mix, const Mat* w_mix) {
  const int n = m.torus_rank;
  const int dim = m.dim();
  WittArtinDecomposition wa;
  wa.at = at;
  wa.momentum_jacobian = momentum_jacobian(m, at);

  {
    Eigen::JacobiSVD<Mat> svd(wa.momentum_jacobian);
    const auto& sv = svd.singularValues();
    if (n > 0 && sv(sv.size() - 1) <= 1e-10 * sv(0)) {
      throw DomainError(
          "witt-artin: momentum Jacobian rank-deficient (action not free here)");
    }
  }

  Mat orbit_cols = orthonormalize(orbit_basis(m, wa.momentum_jacobian));
  if (orbit_cols.cols() != n) {
    throw DomainError("witt-artin: orbit rank loss, action not free at the point");
  }
  wa.orbit = SubspaceBasis{orbit_cols, BasisLabel::Orbit};

  SubspaceBasis kernel = kernel_basis(wa.momentum_jacobian);
  if (kernel.dim() != dim - n) {
    throw DomainError("witt-artin: kernel of the momentum Jacobian has wrong dimension");
  }

  // V_m: complement of the orbit inside the kernel. The restricted form
  // degenerates exactly along the orbit, so every complement is symplectic.
  Mat v_cols = orthonormalize(kernel.columns -
                              orbit_cols * (orbit_cols.transpose() * kernel.columns));
  if (v_cols.cols() != dim - 2 * n) {
    throw DomainError("witt-artin: symplectic normal space has wrong dimension");
  }
  if (v_mix && v_cols.cols() > 0) {
    v_cols = orthonormalize(v_cols + orbit_cols * (*v_mix));
    if (v_cols.cols() != dim - 2 * n) {
      throw DomainError("witt-artin: randomized normal space lost rank");
    }
  }
  wa.symplectic_normal = SubspaceBasis{v_cols, BasisLabel::SymplecticNormal};

  const SubspaceBasis container =
      symplectic_orthogonal(wa.symplectic_normal, m.structure);
  std::optional<Mat> start;
  if (w_mix) {
    // randomized starting complement of the orbit inside the container
    Mat c0 = orthonormalize(container.columns -
                            orbit_cols * (orbit_cols.transpose() * container.columns));
    start = orthonormalize(c0 + orbit_cols * (*w_mix));
  }
  wa.orbital_complement =
      lagrangian_complement(wa.orbit, container, m.structure, start);
  return wa;
}

}  // namespace

WittArtinDecomposition decompose(const Model& m, const PhasePoint& at) {
  if (!m.in_domain(at)) throw DomainError("decompose: point outside domain");
  return assemble(m, at, nullptr, nullptr);
}

WittArtinDecomposition decompose_randomized(const Model& m, const PhasePoint& at,
                                            unsigned seed) {
  if (!m.in_domain(at)) throw DomainError("decompose: point outside domain");
  const int n = m.torus_rank;
  const int dim = m.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  Mat v_mix(n, dim - 2 * n);
  for (long i = 0; i < v_mix.rows(); ++i) {
    for (long j = 0; j < v_mix.cols(); ++j) v_mix(i, j) = u(rng);
  }
  Mat w_mix(n, n);
  for (long i = 0; i < w_mix.rows(); ++i) {
    for (long j = 0; j < w_mix.cols(); ++j) w_mix(i, j) = u(rng);
  }
  return assemble(m, at, &v_mix, &w_mix);
}

SubspaceBasis nondegeneracy_space(const WittArtinDecomposition& wa,
                                  const SubtorusInclusion& sub) {
  const int n = static_cast<int>(wa.momentum_jacobian.rows());
  const int r = sub.rank();
  const Mat& w = wa.orbital_complement.columns;

  Mat a_alpha;
  if (r == 0) {
    a_alpha = w;
  } else {
    // A_alpha = {w in W : i^*(mu + DJ w) = i^* mu} = ker(i^T DJ) within W
    const Mat constraint = sub.real().transpose() * wa.momentum_jacobian * w;  // r x n
    const SubspaceBasis coords = kernel_basis(constraint);
    a_alpha = w * coords.columns;
  }
  if (static_cast<int>(a_alpha.cols()) != n - r) {
    throw DomainError(
        "nondegeneracy_space: broken-momentum slice has wrong dimension");
  }
  Mat joined(w.rows(), a_alpha.cols() + wa.symplectic_normal.dim());
  joined.leftCols(a_alpha.cols()) = a_alpha;
  joined.rightCols(wa.symplectic_normal.dim()) = wa.symplectic_normal.columns;
  return SubspaceBasis{orthonormalize(joined), BasisLabel::Nondegeneracy};
}

SubspaceBasis poisson_nondegeneracy_space(const WittArtinDecomposition& wa) {
  const Mat& w = wa.orbital_complement.columns;
  Mat joined(w.rows(), w.cols() + wa.symplectic_normal.dim());
  joined.leftCols(w.cols()) = w;
  joined.rightCols(wa.symplectic_normal.dim()) = wa.symplectic_normal.columns;
  return SubspaceBasis{orthonormalize(joined), BasisLabel::Nondegeneracy};
}

Mat momentum_component_hessian(const Model& m, int component, const PhasePoint& x) {
  Mat h = fd_jacobian(
      [&](const Vec& y) { return momentum_gradient(m, component, y); }, x, 1e-5);
  return 0.5 * (h + h.transpose());
}

NondegeneracyReport check_nondegenerate(const Model& m, const PhasePoint& at,
                                        const Vec& xi_full,
                                        const SubspaceBasis& space) {
  if (static_cast<int>(xi_full.size()) != m.torus_rank) {
    throw std::invalid_argument("check_nondegenerate: velocity must be full-torus");
  }
  const Vec aug = evaluate_gradient(m, 0.0, at) -
                  momentum_combination_gradient(m, xi_full, at);
  if (aug.norm() > 1e-8) {
    throw std::invalid_argument(
        "check_nondegenerate: point is not a critical point of the augmented Hamiltonian");
  }
  Mat hess = evaluate_hessian(m, 0.0, at);
  for (int i = 0; i < m.torus_rank; ++i) {
    if (xi_full(i) != 0) hess -= xi_full(i) * momentum_component_hessian(m, i, at);
  }
  NondegeneracyReport report;
  report.space = space;
  const Mat& b = space.columns;
  Mat restricted = b.transpose() * hess * b;
  report.restricted_hessian = 0.5 * (restricted + restricted.transpose());

  if (space.dim() == 0) {
    report.eigenvalues = Vec();
    report.nondegenerate = true;  // empty form is vacuously nondegenerate
    report.signature = {0, 0};
    return report;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(report.restricted_hessian);
  report.eigenvalues = eig.eigenvalues();
  const double radius = report.eigenvalues.cwiseAbs().maxCoeff();
  const double threshold = 1e-8 * std::max(1.0, radius);
  report.nondegenerate = report.eigenvalues.cwiseAbs().minCoeff() > threshold;
  int pos = 0, neg = 0;
  for (int i = 0; i < report.eigenvalues.size(); ++i) {
    if (report.eigenvalues(i) > threshold) ++pos;
    else if (report.eigenvalues(i) < -threshold) ++neg;
  }
  report.signature = {pos, neg};
  return report;
}

}  // namespace symbreak
