#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace symbreak {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an evaluator is asked for a point outside its chart domain,
/// or when a non-finite value is encountered where smoothness is assumed.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Symplectic structure
// ---------------------------------------------------------------------------

/// Antisymmetric nondegenerate bilinear form on R^{2N}.
///
/// Sign conventions used by the whole library:
///   pairing(u, v)   = u^T * omega * v
///   poisson tensor  P = (omega^T)^{-1}
///   X_f             = P * grad f        (Hamiltonian vector field)
///   {f, g}          = grad f^T * P * grad g
/// so that {q, p} = +1 and H = p generates qdot = +1. For the canonical
/// block form, P coincides with omega and omega^2 = -I.
class SymplecticStructure {
 public:
  explicit SymplecticStructure(Mat omega);

  /// Canonical form on R^{2N} with pairing(e_i, e_{N+i}) = +1.
  static SymplecticStructure canonical(int half_dim);

  int dim() const { return static_cast<int>(omega_.rows()); }
  const Mat& omega() const { return omega_; }
  const Mat& poisson_tensor() const { return poisson_; }

  double pairing(const Vec& u, const Vec& v) const;

 private:
  Mat omega_;
  Mat poisson_;
};

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

enum class BasisLabel {
  Orbit,              // t^n . m
  SymplecticNormal,   // V_m
  OrbitalComplement,  // W
  MomentumSlice,      // A_alpha
  Nondegeneracy,      // N_alpha
  Generic,
};

/// Full-column-rank basis of a subspace of R^{2N}. Operations in this
/// library return orthonormal columns.
struct SubspaceBasis {
  Mat columns;
  BasisLabel label = BasisLabel::Generic;

  int ambient_dim() const { return static_cast<int>(columns.rows()); }
  int dim() const { return static_cast<int>(columns.cols()); }
};

/// Validating constructor: throws std::invalid_argument when the columns are
/// numerically rank-deficient (smallest singular value <= 1e-10 relative).
SubspaceBasis make_basis(Mat columns, BasisLabel label = BasisLabel::Generic);

/// Orthonormal basis of the column span (SVD-based, rank-revealing).
Mat orthonormalize(const Mat& columns, double rel_tol = 1e-10);

/// sin of the largest principal angle between the two column spans;
/// 0 when the spans coincide, 1 when some direction is orthogonal.
double span_gap(const Mat& a, const Mat& b);

/// Orthonormal basis of {v : A v = 0}. Rank is decided by singular values
/// below tol * sigma_max. A zero map yields the full space, a surjective
/// wide map a (cols - rows)-dimensional basis, and an injective map an
/// empty basis.
SubspaceBasis kernel_basis(const Mat& a, double tol = 1e-10);

/// Orthonormal basis of S^omega = {v : pairing(s, v) = 0 for all s in S}.
/// dim(result) = dim(ambient) - dim(S); applying the operation twice
/// recovers the original span.
SubspaceBasis symplectic_orthogonal(const SubspaceBasis& s,
                                    const SymplecticStructure& j);

/// Lagrangian complement of an isotropic T inside a container U with
/// dim U = 2 dim T. The result W satisfies span(W) + span(T) = span(U),
/// pairing vanishes on W x W, and dim W = dim T. Construction: start from
/// the orthonormal complement C of T in U and subtract the omega-coupled
/// T-components, c_i -> c_i + sum_k A_ik t_k with A = (1/2) G P^{-T},
/// G = C^T omega C, P = C^T omega T.
/// Throws std::invalid_argument when T is not isotropic / not inside U,
/// and DomainError when the pairing P is numerically singular (degenerate
/// container).
///
/// `start_complement`, when given, replaces the default orthonormal start;
/// its columns must span some complement of T in U (different starts yield
/// different, equally valid Lagrangian complements).
SubspaceBasis lagrangian_complement(const SubspaceBasis& t,
                                    const SubspaceBasis& u,
                                    const SymplecticStructure& j,
                                    const std::optional<Mat>& start_complement = {});

// ---------------------------------------------------------------------------
// Newton solving
// ---------------------------------------------------------------------------

enum class RankPolicy {
  SquareSolve,    // LU solve; reports SingularJacobian on rank loss
  PseudoInverse,  // SVD minimum-norm least-squares step (default)
};

struct NewtonOptions {
  int max_iters = 50;
  double abs_tol = 1e-12;        // residual norm target
  double step_damping = 0.5;     // backtracking factor in (0,1)
  double fd_step = 1e-6;         // Jacobian finite differences
  RankPolicy rank_policy = RankPolicy::PseudoInverse;
};

enum class NewtonStatus {
  Converged,
  MaxIterations,
  SingularJacobian,  // square-solve policy only; caller may switch policy
  StalledLineSearch,
  NonFinite,
};

struct NewtonResult {
  Vec x;
  double residual_norm = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;
  NewtonStatus status = NewtonStatus::MaxIterations;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

/// Damped Newton iteration on F(x) = 0. Never throws on non-convergence;
/// the outcome is carried in the result record. When no Jacobian is given
/// it is formed by central differences with opts.fd_step.
NewtonResult newton_solve(const ResidualFn& f, const Vec& x0,
                          const NewtonOptions& opts = {},
                          const JacobianFn& jac = nullptr);

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

struct FdOptions {
  double step = 0;          // 0 -> default: 1e-5 (gradient), 5e-4 (Hessian)
  bool richardson = false;  // one level of step-halving extrapolation
};

/// Central-difference gradient of a scalar field. Propagates DomainError
/// when the field evaluates to a non-finite value.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                const FdOptions& opts = {});

/// Central-difference Hessian, symmetrized as (H + H^T)/2.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
               const FdOptions& opts = {});

/// Central-difference Jacobian of a vector field (one column per coordinate).
Mat fd_jacobian(const ResidualFn& f, const Vec& x, double step = 1e-6);

}  // namespace symbreak
