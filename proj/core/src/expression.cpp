#include "symbreak/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace symbreak::expr {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& variables,
         const std::map<std::string, double>& constants)
      : src_(src), variables_(variables), constants_(constants) {}

  Expression run() {
    Expression e;
    e.n_vars_ = static_cast<int>(variables_.size());
    e.var_names_ = variables_;
    nodes_ = &e.nodes_;
    skip_ws();
    e.root_ = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) {
      throw ParseError("unexpected trailing input", pos_);
    }
    return e;
  }

 private:
  using Op = Expression::Op;

  int add_node(Expression::Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      last_token_ = pos_;
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        int rhs = parse_term();
        lhs = add_node({Op::Add, 0, -1, lhs, rhs});
      } else if (eat('-')) {
        int rhs = parse_term();
        lhs = add_node({Op::Sub, 0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        int rhs = parse_factor();
        lhs = add_node({Op::Mul, 0, -1, lhs, rhs});
      } else if (eat('/')) {
        int rhs = parse_factor();
        lhs = add_node({Op::Div, 0, -1, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    if (eat('-')) {
      int a = parse_factor();
      return add_node({Op::Neg, 0, -1, a, -1});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (eat('^')) {
      int exponent = parse_factor();  // right-associative, -x binds inside
      return add_node({Op::Pow, 0, -1, base, exponent});
    }
    return base;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) {
      throw ParseError("unexpected end of input", last_token_);
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    if (c == '(') {
      last_token_ = pos_;
      ++pos_;
      int inner = parse_expr();
      if (!eat(')')) {
        throw ParseError("expected ')'", last_token_);
      }
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) {
      throw ParseError("malformed number", pos_);
    }
    last_token_ = pos_;
    pos_ += static_cast<std::size_t>(end - begin);
    return add_node({Op::Constant, v, -1, -1, -1});
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    last_token_ = start;
    const std::string name = src_.substr(start, pos_ - start);

    static const std::map<std::string, Op> functions = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}, {"exp", Op::Exp}};
    auto fit = functions.find(name);
    if (fit != functions.end()) {
      if (!eat('(')) {
        throw ParseError("function '" + name + "' expects '('", pos_);
      }
      const std::size_t open = last_token_;
      int arg = parse_expr();
      if (!eat(')')) {
        throw ParseError("unclosed argument list of '" + name + "'", open);
      }
      return add_node({fit->second, 0, -1, arg, -1});
    }

    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) {
        return add_node({Op::Variable, 0, static_cast<int>(i), -1, -1});
      }
    }
    auto cit = constants_.find(name);
    if (cit != constants_.end()) {
      return add_node({Op::Constant, cit->second, -1, -1, -1});
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  const std::string& src_;
  const std::vector<std::string>& variables_;
  const std::map<std::string, double>& constants_;
  std::vector<Expression::Node>* nodes_ = nullptr;
  std::size_t pos_ = 0;
  std::size_t last_token_ = 0;
};

Expression Expression::parse(const std::string& source,
                             const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
  return Parser(source, variables, constants).run();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double Expression::eval_value(int node, const Eigen::VectorXd& vars) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::Constant: return n.constant;
    case Op::Variable: return vars(n.var);
    case Op::Add: return eval_value(n.a, vars) + eval_value(n.b, vars);
    case Op::Sub: return eval_value(n.a, vars) - eval_value(n.b, vars);
    case Op::Mul: return eval_value(n.a, vars) * eval_value(n.b, vars);
    case Op::Div: return eval_value(n.a, vars) / eval_value(n.b, vars);
    case Op::Pow: return std::pow(eval_value(n.a, vars), eval_value(n.b, vars));
    case Op::Neg: return -eval_value(n.a, vars);
    case Op::Sin: return std::sin(eval_value(n.a, vars));
    case Op::Cos: return std::cos(eval_value(n.a, vars));
    case Op::Sqrt: return std::sqrt(eval_value(n.a, vars));
    case Op::Exp: return std::exp(eval_value(n.a, vars));
  }
  return 0;
}

double Expression::value(const Eigen::VectorXd& vars) const {
  if (vars.size() != n_vars_) {
    throw std::invalid_argument("expression: wrong variable count");
  }
  return eval_value(root_, vars);
}

double Expression::eval_dual(int node, const Eigen::VectorXd& vars,
                             std::vector<Eigen::VectorXd>& grads,
                             std::vector<double>& values) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  auto& g = grads[static_cast<std::size_t>(node)];
  g = Eigen::VectorXd::Zero(n_vars_);
  double v = 0;
  switch (n.op) {
    case Op::Constant:
      v = n.constant;
      break;
    case Op::Variable:
      v = vars(n.var);
      g(n.var) = 1.0;
      break;
    case Op::Add: {
      const double a = eval_dual(n.a, vars, grads, values);
      const double b = eval_dual(n.b, vars, grads, values);
      v = a + b;
      g = grads[n.a] + grads[n.b];
      break;
    }
    case Op::Sub: {
      const double a = eval_dual(n.a, vars, grads, values);
      const double b = eval_dual(n.b, vars, grads, values);
      v = a - b;
      g = grads[n.a] - grads[n.b];
      break;
    }
    case Op::Mul: {
      const double a = eval_dual(n.a, vars, grads, values);
      const double b = eval_dual(n.b, vars, grads, values);
      v = a * b;
      g = b * grads[n.a] + a * grads[n.b];
      break;
    }
    case Op::Div: {
      const double a = eval_dual(n.a, vars, grads, values);
      const double b = eval_dual(n.b, vars, grads, values);
      v = a / b;
      g = (grads[n.a] - v * grads[n.b]) / b;
      break;
    }
    case Op::Pow: {
      const double a = eval_dual(n.a, vars, grads, values);
      const Node& bn = nodes_[static_cast<std::size_t>(n.b)];
      if (bn.op == Op::Constant) {
        // d(a^c) = c a^{c-1} da, valid for negative bases with integer c
        const double c = bn.constant;
        v = std::pow(a, c);
        g = (c * std::pow(a, c - 1)) * grads[n.a];
        grads[static_cast<std::size_t>(n.b)] = Eigen::VectorXd::Zero(n_vars_);
        values[static_cast<std::size_t>(n.b)] = c;
      } else {
        const double b = eval_dual(n.b, vars, grads, values);
        v = std::pow(a, b);
        g = v * (grads[n.b] * std::log(a) + (b / a) * grads[n.a]);
      }
      break;
    }
    case Op::Neg:
      v = -eval_dual(n.a, vars, grads, values);
      g = -grads[n.a];
      break;
    case Op::Sin: {
      const double a = eval_dual(n.a, vars, grads, values);
      v = std::sin(a);
      g = std::cos(a) * grads[n.a];
      break;
    }
    case Op::Cos: {
      const double a = eval_dual(n.a, vars, grads, values);
      v = std::cos(a);
      g = -std::sin(a) * grads[n.a];
      break;
    }
    case Op::Sqrt: {
      const double a = eval_dual(n.a, vars, grads, values);
      v = std::sqrt(a);
      g = (0.5 / v) * grads[n.a];
      break;
    }
    case Op::Exp: {
      const double a = eval_dual(n.a, vars, grads, values);
      v = std::exp(a);
      g = v * grads[n.a];
      break;
    }
  }
  values[static_cast<std::size_t>(node)] = v;
  return v;
}

double Expression::value_and_gradient(const Eigen::VectorXd& vars,
                                      Eigen::VectorXd& grad) const {
  if (vars.size() != n_vars_) {
    throw std::invalid_argument("expression: wrong variable count");
  }
  std::vector<Eigen::VectorXd> grads(nodes_.size());
  std::vector<double> values(nodes_.size(), 0.0);
  const double v = eval_dual(root_, vars, grads, values);
  grad = grads[static_cast<std::size_t>(root_)];
  return v;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string Expression::print(int node) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::Constant:
      if (n.constant < 0) return "(-" + format_number(-n.constant) + ")";
      return format_number(n.constant);
    case Op::Variable: return var_names_[static_cast<std::size_t>(n.var)];
    case Op::Add: return "(" + print(n.a) + " + " + print(n.b) + ")";
    case Op::Sub: return "(" + print(n.a) + " - " + print(n.b) + ")";
    case Op::Mul: return "(" + print(n.a) + " * " + print(n.b) + ")";
    case Op::Div: return "(" + print(n.a) + " / " + print(n.b) + ")";
    case Op::Pow: return "(" + print(n.a) + "^" + print(n.b) + ")";
    case Op::Neg: return "(-" + print(n.a) + ")";
    case Op::Sin: return "sin(" + print(n.a) + ")";
    case Op::Cos: return "cos(" + print(n.a) + ")";
    case Op::Sqrt: return "sqrt(" + print(n.a) + ")";
    case Op::Exp: return "exp(" + print(n.a) + ")";
  }
  return "";
}

std::string Expression::str() const { return print(root_); }

}  // namespace symbreak::expr
