#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "symbreak/numkernel.hpp"

namespace symbreak {

/// Point in a phase-space chart; validity is decided by the owning model's
/// domain predicate.
using PhasePoint = Vec;

/// Lattice inclusion i : t^r -> t^n of a subtorus, stored as an n x r
/// integer matrix with primitive (gcd 1), rationally independent columns.
/// Its transpose realizes i* on momentum covectors.
struct SubtorusInclusion {
  Eigen::MatrixXi matrix;

  int torus_rank() const { return static_cast<int>(matrix.rows()); }  // n
  int rank() const { return static_cast<int>(matrix.cols()); }        // r
  Mat real() const { return matrix.cast<double>(); }

  static SubtorusInclusion trivial(int n);   // r = 0, fully broken symmetry
  static SubtorusInclusion identity(int n);  // r = n, nothing broken
};

/// Validating constructor; throws std::invalid_argument on non-primitive or
/// dependent columns.
SubtorusInclusion make_subtorus(Eigen::MatrixXi matrix);

/// A Hamiltonian family H_eps on a symplectic chart, together with a torus
/// action given in closed form and its momentum map. Evaluators must be
/// reentrant; a constructed model is immutable and safe for concurrent use.
struct Model {
  std::string name;
  SymplecticStructure structure = SymplecticStructure::canonical(1);
  int torus_rank = 0;  // n

  /// Chart validity predicate; null means the whole R^{2N} chart is valid.
  std::function<bool(const PhasePoint&)> domain;

  /// (eps, x) -> H_eps(x); analytic gradient optional (finite differences
  /// otherwise).
  std::function<double(double, const PhasePoint&)> hamiltonian;
  std::function<Vec(double, const PhasePoint&)> hamiltonian_gradient;

  /// Momentum components J_1..J_n with optional analytic gradients.
  std::vector<std::function<double(const PhasePoint&)>> momentum_components;
  std::vector<std::function<Vec(const PhasePoint&)>> momentum_component_gradients;

  /// Closed-form action (theta in R^n mod 2pi, x) -> x'.
  std::function<PhasePoint(const Vec&, const PhasePoint&)> action;

  /// Optional analytic differential D_x action(theta, .) at x (2N x 2N);
  /// finite differences otherwise. Slice-chart pushforwards need it exact,
  /// so bundled and parsed models always provide one.
  std::function<Mat(const Vec&, const PhasePoint&)> action_jacobian;

  /// Box used by randomized validation and test sampling (2N x 2, lo | hi).
  Mat sample_box;

  /// Bundled hints: a seed and momentum target for locating the base
  /// relative equilibrium of H_0 (may be empty).
  Vec re_seed;
  Vec re_momentum;

  int dim() const { return structure.dim(); }
  bool in_domain(const PhasePoint& x) const { return !domain || domain(x); }
};

// --- evaluation ------------------------------------------------------------

double evaluate(const Model& m, double eps, const PhasePoint& x);
Vec evaluate_gradient(const Model& m, double eps, const PhasePoint& x);
/// Symmetric Hessian; finite differences of the analytic gradient when one
/// is supplied, value-based otherwise.
Mat evaluate_hessian(const Model& m, double eps, const PhasePoint& x);

PhasePoint act(const Model& m, const Vec& theta, const PhasePoint& x);

Vec momentum(const Model& m, const PhasePoint& x);
Vec restricted_momentum(const Model& m, const SubtorusInclusion& sub,
                        const PhasePoint& x);
Vec momentum_gradient(const Model& m, int component, const PhasePoint& x);
/// grad of J^xi = sum_i xi_i J_i.
Vec momentum_combination_gradient(const Model& m, const Vec& xi,
                                  const PhasePoint& x);

/// Infinitesimal generator of the action: X_{J^xi}(x) = P grad J^xi(x).
Vec generator(const Model& m, const Vec& xi, const PhasePoint& x);

/// D_x action(theta, .) at x: analytic when the model carries one, central
/// finite differences otherwise.
Mat act_differential(const Model& m, const Vec& theta, const PhasePoint& x);

/// Momentum Jacobian DJ(x): n x 2N matrix of component gradients.
Mat momentum_jacobian(const Model& m, const PhasePoint& x);

/// {f, g}(x) = grad f^T P grad g with the library's sign convention.
double poisson_bracket(const Model& m,
                       const std::function<double(const PhasePoint&)>& f,
                       const std::function<double(const PhasePoint&)>& g,
                       const PhasePoint& x);

// --- structural validation ---------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double worst = 0;  // worst-case violation magnitude observed
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  std::string summary() const;
};

/// Sampling-based checks of the model's structural hypotheses: pairwise
/// Poisson-commuting momenta, full invariance of H_0, invariance of H_eps
/// only along the subtorus (broken directions are reported, not failed),
/// symplectic action, and generator consistency. Failures are report
/// entries, never exceptions. Deterministic for a fixed seed.
ValidationReport validate(const Model& m,
                          const std::optional<SubtorusInclusion>& sub,
                          int sample_count = 128, unsigned seed = 20240901,
                          double eps_probe = 0.1);

/// Deterministic rejection sampler over the model's sample box.
PhasePoint sample_point(const Model& m, std::function<double()>& unit_rand);

}  // namespace symbreak
