#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace symbreak::expr {

/// Parse failure with the byte offset of the offending token in the source.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Arithmetic expression over named variables, numeric constants and the
/// operator set {+, -, *, /, ^, unary -, sin, cos, sqrt, exp}. Expressions
/// are deliberately condition-free: every expression is smooth on the open
/// set where it is finite.
///
/// First derivatives are exact (forward-mode dual numbers over the tree);
/// canonical printing is a fixed point of parse-then-print.
class Expression {
 public:
  /// Parses `source`. Identifiers must be declared variables or keys of
  /// `constants` (which are inlined as literals). Throws ParseError with a
  /// position on malformed input, unknown identifiers, or arity errors.
  static Expression parse(const std::string& source,
                          const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {});

  double value(const Eigen::VectorXd& vars) const;

  /// Value plus exact gradient with respect to every declared variable.
  double value_and_gradient(const Eigen::VectorXd& vars,
                            Eigen::VectorXd& grad) const;

  /// Canonical fully-parenthesized form; parse(str()).str() == str().
  std::string str() const;

  int variable_count() const { return n_vars_; }

 private:
  enum class Op {
    Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Sqrt, Exp
  };
  struct Node {
    Op op;
    double constant = 0;
    int var = -1;
    int a = -1, b = -1;
  };

  double eval_value(int node, const Eigen::VectorXd& vars) const;
  double eval_dual(int node, const Eigen::VectorXd& vars,
                   std::vector<Eigen::VectorXd>& grads,
                   std::vector<double>& values) const;
  std::string print(int node) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int n_vars_ = 0;
  std::vector<std::string> var_names_;

  friend class Parser;
};

}  // namespace symbreak::expr
