#include "symbreak/modelzoo.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "symbreak/expression.hpp"

namespace symbreak {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Charged spherical pendulum
// ---------------------------------------------------------------------------

Model make_pendulum(const PendulumParams& p) {
  if (p.mass <= 0 || p.length <= 0 || p.gravity <= 0 || p.coulomb <= 0 ||
      p.charge_depth <= 0 || p.offset_scale <= 0) {
    throw std::invalid_argument("pendulum parameters must be positive");
  }
  const double l = p.length, d = p.charge_depth, mb = p.mass, g = p.gravity;
  const double kap = p.coulomb, a0 = p.offset_scale;
  const double rho_star_sq = std::pow(kap * d / (mb * g), 2.0 / 3.0);
  const double cos_ring = (l * l + d * d - rho_star_sq) / (2 * l * d);
  if (!(cos_ring > -1.0 && cos_ring < 1.0)) {
    throw std::invalid_argument(
        "pendulum parameters admit no ring of equilibria (balance angle outside (-1,1))");
  }

  Model m;
  m.name = "pendulum";
  m.structure = SymplecticStructure::canonical(2);
  m.torus_rank = 1;
  m.domain = [](const PhasePoint& x) { return std::sin(x(0)) > 0.0; };

  // x = (theta, phi, p_theta, p_phi); bob at (l s c, l s s, -l cos theta),
  // charge at (eps a0, 0, -d)
  auto r_sq = [=](double eps, const PhasePoint& x) {
    const double delta = eps * a0;
    return l * l + d * d + delta * delta -
           2 * delta * l * std::sin(x(0)) * std::cos(x(1)) -
           2 * l * d * std::cos(x(0));
  };

  m.hamiltonian = [=](double eps, const PhasePoint& x) {
    const double s = std::sin(x(0));
    return x(2) * x(2) / (2 * mb * l * l) +
           x(3) * x(3) / (2 * mb * l * l * s * s) - mb * g * l * std::cos(x(0)) +
           kap / std::sqrt(r_sq(eps, x));
  };
  m.hamiltonian_gradient = [=](double eps, const PhasePoint& x) {
    const double s = std::sin(x(0)), c = std::cos(x(0));
    const double delta = eps * a0;
    const double rsq = r_sq(eps, x);
    const double r3 = rsq * std::sqrt(rsq);
    Vec grad(4);
    const double drsq_dth = -2 * delta * l * c * std::cos(x(1)) + 2 * l * d * s;
    const double drsq_dph = 2 * delta * l * s * std::sin(x(1));
    grad(0) = -x(3) * x(3) * c / (mb * l * l * s * s * s) + mb * g * l * s -
              kap * drsq_dth / (2 * r3);
    grad(1) = -kap * drsq_dph / (2 * r3);
    grad(2) = x(2) / (mb * l * l);
    grad(3) = x(3) / (mb * l * l * s * s);
    return grad;
  };
  m.momentum_components = {[](const PhasePoint& x) { return x(3); }};
  m.momentum_component_gradients = {[](const PhasePoint& x) {
    Vec g = Vec::Zero(x.size());
    g(3) = 1.0;
    return g;
  }};
  // phi is left unwrapped; the chart is 2pi-periodic in it and unwrapped
  // addition keeps act(0, x) = x exact
  m.action = [](const Vec& theta, const PhasePoint& x) {
    PhasePoint y = x;
    y(1) = x(1) + theta(0);
    return y;
  };
  m.action_jacobian = [](const Vec&, const PhasePoint& x) {
    return Mat(Mat::Identity(x.size(), x.size()));
  };
  m.sample_box.resize(4, 2);
  m.sample_box << 0.4, M_PI - 0.4,
                  0.0, 2 * M_PI,
                  -0.5, 0.5,
                  -0.5, 0.5;
  m.re_seed.resize(4);
  m.re_seed << 1.5, 0.3, 0.0, 0.0;
  m.re_momentum.resize(1);
  m.re_momentum << 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Coupled plane oscillators
// ---------------------------------------------------------------------------

Model make_oscillator(const OscillatorParams& p) {
  if (!std::isfinite(p.c1) || !std::isfinite(p.c2)) {
    throw std::invalid_argument("oscillator coefficients must be finite");
  }
  if (p.coupling == OscillatorCoupling::FullBreak && (p.c1 == 0 || p.c2 == 0)) {
    throw std::invalid_argument("full-break coupling needs c1 != 0 and c2 != 0");
  }
  const bool diagonal = p.coupling == OscillatorCoupling::DiagonalInvariant;
  const double c1 = p.c1, c2 = p.c2;

  Model m;
  m.name = diagonal ? "oscillator" : "oscillator-fullbreak";
  m.structure = SymplecticStructure::canonical(2);
  m.torus_rank = 2;
  m.domain = [](const PhasePoint& x) {
    return x(0) * x(0) + x(2) * x(2) > 0 && x(1) * x(1) + x(3) * x(3) > 0;
  };
  // x = (q1, q2, p1, p2), I_j = (q_j^2 + p_j^2)/2
  m.hamiltonian = [=](double eps, const PhasePoint& x) {
    const double i1 = 0.5 * (x(0) * x(0) + x(2) * x(2));
    const double i2 = 0.5 * (x(1) * x(1) + x(3) * x(3));
    const double h0 = 0.5 * (i1 * i1 + i2 * i2);
    if (diagonal) return h0 + eps * (x(0) * x(1) + x(2) * x(3));
    return h0 + eps * (c1 * x(0) + c2 * x(1));
  };
  m.hamiltonian_gradient = [=](double eps, const PhasePoint& x) {
    const double i1 = 0.5 * (x(0) * x(0) + x(2) * x(2));
    const double i2 = 0.5 * (x(1) * x(1) + x(3) * x(3));
    Vec g(4);
    g << i1 * x(0), i2 * x(1), i1 * x(2), i2 * x(3);
    if (diagonal) {
      g(0) += eps * x(1);
      g(1) += eps * x(0);
      g(2) += eps * x(3);
      g(3) += eps * x(2);
    } else {
      g(0) += eps * c1;
      g(1) += eps * c2;
    }
    return g;
  };
  m.momentum_components = {
      [](const PhasePoint& x) { return 0.5 * (x(0) * x(0) + x(2) * x(2)); },
      [](const PhasePoint& x) { return 0.5 * (x(1) * x(1) + x(3) * x(3)); }};
  m.momentum_component_gradients = {
      [](const PhasePoint& x) {
        Vec g(4);
        g << x(0), 0, x(2), 0;
        return g;
      },
      [](const PhasePoint& x) {
        Vec g(4);
        g << 0, x(1), 0, x(3);
        return g;
      }};
  m.action = [](const Vec& theta, const PhasePoint& x) {
    PhasePoint y(4);
    const double c_1 = std::cos(theta(0)), s_1 = std::sin(theta(0));
    const double c_2 = std::cos(theta(1)), s_2 = std::sin(theta(1));
    y(0) = x(0) * c_1 + x(2) * s_1;
    y(2) = -x(0) * s_1 + x(2) * c_1;
    y(1) = x(1) * c_2 + x(3) * s_2;
    y(3) = -x(1) * s_2 + x(3) * c_2;
    return y;
  };
  m.action_jacobian = [](const Vec& theta, const PhasePoint&) {
    const double c_1 = std::cos(theta(0)), s_1 = std::sin(theta(0));
    const double c_2 = std::cos(theta(1)), s_2 = std::sin(theta(1));
    Mat d = Mat::Zero(4, 4);
    d(0, 0) = c_1;  d(0, 2) = s_1;
    d(2, 0) = -s_1; d(2, 2) = c_1;
    d(1, 1) = c_2;  d(1, 3) = s_2;
    d(3, 1) = -s_2; d(3, 3) = c_2;
    return d;
  };
  m.sample_box.resize(4, 2);
  m.sample_box << -1.3, 1.3, -1.3, 1.3, -1.3, 1.3, -1.3, 1.3;
  // phase-aligned base point: the gauge rows pin the chart frame to the
  // seed's plane phases, and the bundled scenarios measure angles from it
  m.re_seed.resize(4);
  m.re_seed << 1.0, 1.0, 0.0, 0.0;
  m.re_momentum.resize(2);
  m.re_momentum << 0.5, 0.5;
  return m;
}

// ---------------------------------------------------------------------------
// Config texts for the bundled models
// ---------------------------------------------------------------------------

std::string pendulum_config(const PendulumParams& p) {
  nlohmann::ordered_json cfg;
  cfg["name"] = "pendulum";
  cfg["chart"] = {{"dim", 4},
                  {"names", {"th", "ph", "pth", "pph"}},
                  {"domain", "sin(th)"},
                  {"sample", {{0.4, M_PI - 0.4}, {0.0, 2 * M_PI}, {-0.5, 0.5}, {-0.5, 0.5}}}};
  cfg["torus"] = {
      {"n", 1},
      {"J", {"pph"}},
      {"action", {"th", "ph + t1", "pth", "pph"}}};
  cfg["hamiltonian"] = {
      {"H",
       "pth^2 / (2 * mb * el^2) + pph^2 / (2 * mb * el^2 * sin(th)^2) "
       "- mb * grav * el * cos(th) "
       "+ kap / sqrt(el^2 + dd^2 + (eps * a0)^2 "
       "- 2 * (eps * a0) * el * sin(th) * cos(ph) - 2 * el * dd * cos(th))"}};
  cfg["params"] = {{"mb", p.mass},     {"el", p.length},      {"grav", p.gravity},
                   {"kap", p.coulomb}, {"dd", p.charge_depth}, {"a0", p.offset_scale}};
  cfg["re_seed"] = {1.5, 0.3, 0.0, 0.0};
  cfg["re_momentum"] = {0.0};
  return cfg.dump(2);
}

std::string oscillator_config(const OscillatorParams& p) {
  const bool diagonal = p.coupling == OscillatorCoupling::DiagonalInvariant;
  nlohmann::ordered_json cfg;
  cfg["name"] = diagonal ? "oscillator" : "oscillator-fullbreak";
  cfg["chart"] = {{"dim", 4},
                  {"names", {"q1", "q2", "p1", "p2"}},
                  {"domain", "(q1^2 + p1^2) * (q2^2 + p2^2)"},
                  {"sample", {{-1.3, 1.3}, {-1.3, 1.3}, {-1.3, 1.3}, {-1.3, 1.3}}}};
  cfg["torus"] = {{"n", 2},
                  {"J", {"(q1^2 + p1^2) / 2", "(q2^2 + p2^2) / 2"}},
                  {"action",
                   {"q1 * cos(t1) + p1 * sin(t1)", "q2 * cos(t2) + p2 * sin(t2)",
                    "p1 * cos(t1) - q1 * sin(t1)", "p2 * cos(t2) - q2 * sin(t2)"}}};
  const std::string h0 = "((q1^2 + p1^2)^2 + (q2^2 + p2^2)^2) / 8";
  cfg["hamiltonian"] = {
      {"H", diagonal ? h0 + " + eps * (q1 * q2 + p1 * p2)"
                     : h0 + " + eps * (c1 * q1 + c2 * q2)"}};
  cfg["params"] = nlohmann::ordered_json::object();
  if (!diagonal) {
    cfg["params"]["c1"] = p.c1;
    cfg["params"]["c2"] = p.c2;
  }
  cfg["re_seed"] = {1.0, 1.0, 0.0, 0.0};
  cfg["re_momentum"] = {0.5, 0.5};
  return cfg.dump(2);
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, double> read_params(const json& cfg) {
  std::map<std::string, double> params;
  if (cfg.contains("params")) {
    for (auto it = cfg["params"].begin(); it != cfg["params"].end(); ++it) {
      params[it.key()] = it.value().get<double>();
    }
  }
  return params;
}

}  // namespace

ParsedModel parse_model(const std::string& config_text) {
  json cfg;
  try {
    cfg = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model config is not valid JSON: ") + e.what());
  }
  for (const char* section : {"chart", "torus", "hamiltonian"}) {
    if (!cfg.contains(section)) {
      throw std::invalid_argument(std::string("model config misses section '") + section + "'");
    }
  }

  const int dim = cfg["chart"].at("dim").get<int>();
  if (dim <= 0 || dim % 2 != 0) {
    throw std::invalid_argument("chart.dim must be a positive even integer");
  }
  std::vector<std::string> names =
      cfg["chart"].at("names").get<std::vector<std::string>>();
  if (static_cast<int>(names.size()) != dim) {
    throw std::invalid_argument("chart.names must list one name per coordinate");
  }
  const int n = cfg["torus"].at("n").get<int>();
  if (n < 0) throw std::invalid_argument("torus.n must be nonnegative");

  const auto params = read_params(cfg);

  using expr::Expression;
  auto shared = [](Expression e) { return std::make_shared<const Expression>(std::move(e)); };

  // variable layouts: H over (x, eps); J and domain over x; action over (x, t)
  std::vector<std::string> x_eps = names;
  x_eps.push_back("eps");
  std::vector<std::string> x_t = names;
  for (int i = 1; i <= n; ++i) x_t.push_back("t" + std::to_string(i));

  auto h_expr = shared(Expression::parse(
      cfg["hamiltonian"].at("H").get<std::string>(), x_eps, params));

  std::vector<std::shared_ptr<const Expression>> j_exprs;
  for (const auto& src : cfg["torus"].at("J")) {
    j_exprs.push_back(shared(Expression::parse(src.get<std::string>(), names, params)));
  }
  if (static_cast<int>(j_exprs.size()) != n) {
    throw std::invalid_argument("torus.J must list exactly n momentum expressions");
  }

  std::vector<std::shared_ptr<const Expression>> action_exprs;
  for (const auto& src : cfg["torus"].at("action")) {
    action_exprs.push_back(shared(Expression::parse(src.get<std::string>(), x_t, params)));
  }
  if (static_cast<int>(action_exprs.size()) != dim) {
    throw std::invalid_argument("torus.action must list one expression per coordinate");
  }

  std::shared_ptr<const Expression> domain_expr;
  if (cfg["chart"].contains("domain")) {
    domain_expr = shared(Expression::parse(
        cfg["chart"]["domain"].get<std::string>(), names, params));
  }

  Model m;
  m.name = cfg.value("name", std::string("custom"));
  m.structure = SymplecticStructure::canonical(dim / 2);
  m.torus_rank = n;
  if (domain_expr) {
    m.domain = [domain_expr](const PhasePoint& x) {
      const double v = domain_expr->value(x);
      return std::isfinite(v) && v > 0;
    };
  }
  m.hamiltonian = [h_expr, dim](double eps, const PhasePoint& x) {
    Vec vars(dim + 1);
    vars.head(dim) = x;
    vars(dim) = eps;
    return h_expr->value(vars);
  };
  m.hamiltonian_gradient = [h_expr, dim](double eps, const PhasePoint& x) {
    Vec vars(dim + 1);
    vars.head(dim) = x;
    vars(dim) = eps;
    Vec grad;
    h_expr->value_and_gradient(vars, grad);
    return Vec(grad.head(dim));
  };
  for (const auto& je : j_exprs) {
    m.momentum_components.push_back(
        [je](const PhasePoint& x) { return je->value(x); });
    m.momentum_component_gradients.push_back([je](const PhasePoint& x) {
      Vec grad;
      je->value_and_gradient(x, grad);
      return grad;
    });
  }
  m.action = [action_exprs, dim, n](const Vec& theta, const PhasePoint& x) {
    Vec vars(dim + n);
    vars.head(dim) = x;
    vars.tail(n) = theta;
    PhasePoint y(dim);
    for (int i = 0; i < dim; ++i) y(i) = action_exprs[static_cast<std::size_t>(i)]->value(vars);
    return y;
  };
  m.action_jacobian = [action_exprs, dim, n](const Vec& theta, const PhasePoint& x) {
    Vec vars(dim + n);
    vars.head(dim) = x;
    vars.tail(n) = theta;
    Mat d(dim, dim);
    Vec grad;
    for (int i = 0; i < dim; ++i) {
      action_exprs[static_cast<std::size_t>(i)]->value_and_gradient(vars, grad);
      d.row(i) = grad.head(dim).transpose();
    }
    return d;
  };
  if (cfg["chart"].contains("sample")) {
    const auto& box = cfg["chart"]["sample"];
    if (static_cast<int>(box.size()) != dim) {
      throw std::invalid_argument("chart.sample must list one [lo, hi] pair per coordinate");
    }
    m.sample_box.resize(dim, 2);
    for (int i = 0; i < dim; ++i) {
      m.sample_box(i, 0) = box[static_cast<std::size_t>(i)][0].get<double>();
      m.sample_box(i, 1) = box[static_cast<std::size_t>(i)][1].get<double>();
    }
  } else {
    m.sample_box = Mat::Ones(dim, 2);
    m.sample_box.col(0) *= -1.0;
  }
  if (cfg.contains("re_seed")) {
    const auto seed = cfg["re_seed"].get<std::vector<double>>();
    m.re_seed = Eigen::Map<const Vec>(seed.data(), static_cast<long>(seed.size()));
  }
  if (cfg.contains("re_momentum")) {
    const auto mu = cfg["re_momentum"].get<std::vector<double>>();
    m.re_momentum = Eigen::Map<const Vec>(mu.data(), static_cast<long>(mu.size()));
  }

  ParsedModel out{std::move(m), {}};
  out.validation = validate(out.model, std::nullopt, 64);
  return out;
}

ParsedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace symbreak
