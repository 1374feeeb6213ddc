// symbreak: forced-symmetry-breaking analysis of torus-symmetric
// Hamiltonian systems. Subcommands cover model validation, relative
// equilibrium location, Witt-Artin diagnostics, reduced-function sampling,
// the critical-point census with its count bounds, dynamical verification,
// and epsilon sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "symbreak/census.hpp"
#include "symbreak/dynverify.hpp"
#include "symbreak/expression.hpp"
#include "symbreak/modelzoo.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace symbreak;

namespace {

// --------------------------------------------------------------------------
// option plumbing
// --------------------------------------------------------------------------

struct Options {
  std::string model_name;
  std::string model_file;
  std::vector<std::string> params;
  std::string subtorus;     // columns "1,1;0,1"
  std::string mode = "symplectic";
  std::vector<double> eps_list{0.0};
  std::string grid;
  std::string out_dir = ".";
  std::vector<double> seed_point;
  std::vector<double> mu;
  bool deterministic = false;
  int threads = 0;  // 0 -> env or 1
  double newton_tol = 1e-12;
  double grad_tol = 1e-10;
  int samples = 128;
  unsigned rng_seed = 20240901;
  std::string census_path;  // verify input
  bool negative_control = false;
  bool dump_trajectories = false;
};

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Model build_model(const Options& opts, std::string* coupling_note = nullptr) {
  if (!opts.model_file.empty()) {
    auto parsed = load_model_file(opts.model_file);
    if (!parsed.validation.all_pass()) {
      std::cerr << "model-file validation warnings:\n"
                << parsed.validation.summary();
    }
    return parsed.model;
  }

  std::map<std::string, double> params;
  std::string coupling = "diagonal";
  for (const auto& kv : opts.params) {
    const auto at = kv.find('=');
    if (at == std::string::npos) {
      throw std::invalid_argument("--param expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, at);
    const std::string value = kv.substr(at + 1);
    if (key == "coupling") {
      coupling = value;
    } else {
      params[key] = std::stod(value);
    }
  }

  if (opts.model_name == "pendulum") {
    PendulumParams p;
    p.mass = param_or(params, "mass", p.mass);
    p.length = param_or(params, "length", p.length);
    p.gravity = param_or(params, "gravity", p.gravity);
    p.coulomb = param_or(params, "kappa", p.coulomb);
    p.charge_depth = param_or(params, "depth", p.charge_depth);
    p.offset_scale = param_or(params, "a0", p.offset_scale);
    return make_pendulum(p);
  }
  if (opts.model_name == "oscillator") {
    OscillatorParams p;
    if (coupling == "diagonal") {
      p.coupling = OscillatorCoupling::DiagonalInvariant;
    } else if (coupling == "full-break") {
      p.coupling = OscillatorCoupling::FullBreak;
    } else {
      throw std::invalid_argument("unknown oscillator coupling '" + coupling + "'");
    }
    p.c1 = param_or(params, "c1", p.c1);
    p.c2 = param_or(params, "c2", p.c2);
    if (coupling_note) *coupling_note = coupling;
    return make_oscillator(p);
  }
  throw std::invalid_argument(
      "unknown model '" + opts.model_name + "' (builtins: pendulum, oscillator)");
}

SubtorusInclusion build_subtorus(const Options& opts, int n) {
  if (opts.subtorus.empty()) return SubtorusInclusion::trivial(n);
  std::vector<std::vector<int>> cols;
  std::stringstream ss(opts.subtorus);
  std::string col;
  while (std::getline(ss, col, ';')) {
    std::vector<int> entries;
    std::stringstream cs(col);
    std::string item;
    while (std::getline(cs, item, ',')) entries.push_back(std::stoi(item));
    if (static_cast<int>(entries.size()) != n) {
      throw std::invalid_argument("--subtorus column has " +
                                  std::to_string(entries.size()) + " entries, expected " +
                                  std::to_string(n));
    }
    cols.push_back(entries);
  }
  Eigen::MatrixXi m(n, static_cast<int>(cols.size()));
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
  return make_subtorus(std::move(m));
}

ReductionMode build_mode(const Options& opts) {
  if (opts.mode == "symplectic") return ReductionMode::Symplectic;
  if (opts.mode == "poisson") return ReductionMode::Poisson;
  throw std::invalid_argument("--mode must be symplectic or poisson");
}

std::vector<int> build_grid(const Options& opts, int torus_dim) {
  std::vector<int> grid;
  if (!opts.grid.empty()) {
    std::stringstream ss(opts.grid);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stoi(item));
  }
  if (grid.empty()) grid.assign(static_cast<std::size_t>(torus_dim), 64);
  if (static_cast<int>(grid.size()) == 1 && torus_dim > 1) {
    grid.assign(static_cast<std::size_t>(torus_dim), grid.front());
  }
  return grid;
}

int thread_count(const Options& opts) {
  if (opts.deterministic) return 1;
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("SYMBREAK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::optional<Vec> to_vec(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return Vec(Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size())));
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << content;
}

ordered_json vec_json(const Vec& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json mat_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void apply_config_file(Options& opts, const std::string& path, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  ordered_json cfg;
  in >> cfg;
  auto unset = [&](const std::string& flag) {
    const CLI::Option* o = app.get_option_no_throw(flag);
    return o == nullptr || o->count() == 0;
  };
  if (cfg.contains("model")) {
    const auto& mj = cfg["model"];
    if (mj.contains("file") && unset("--model-file")) opts.model_file = mj["file"];
    if (mj.contains("name") && unset("--model")) opts.model_name = mj["name"];
    if (mj.contains("params") && unset("--param")) {
      for (auto it = mj["params"].begin(); it != mj["params"].end(); ++it) {
        std::ostringstream os;
        os << it.key() << "=";
        if (it.value().is_string()) os << it.value().get<std::string>();
        else os << it.value().dump();
        opts.params.push_back(os.str());
      }
    }
  }
  if (cfg.contains("subtorus") && unset("--subtorus")) {
    // array of columns
    std::ostringstream os;
    bool first_col = true;
    for (const auto& col : cfg["subtorus"]) {
      if (!first_col) os << ";";
      first_col = false;
      bool first = true;
      for (const auto& e : col) {
        if (!first) os << ",";
        first = false;
        os << e.get<int>();
      }
    }
    opts.subtorus = os.str();
  }
  if (cfg.contains("mode") && unset("--mode")) opts.mode = cfg["mode"];
  if (cfg.contains("eps") && unset("--eps")) {
    opts.eps_list.clear();
    if (cfg["eps"].is_array()) {
      for (const auto& e : cfg["eps"]) opts.eps_list.push_back(e.get<double>());
    } else {
      opts.eps_list.push_back(cfg["eps"].get<double>());
    }
  }
  if (cfg.contains("grid") && unset("--grid")) {
    std::ostringstream os;
    if (cfg["grid"].is_array()) {
      bool first = true;
      for (const auto& g : cfg["grid"]) {
        if (!first) os << ",";
        first = false;
        os << g.get<int>();
      }
    } else {
      os << cfg["grid"].get<int>();
    }
    opts.grid = os.str();
  }
  if (cfg.contains("out") && unset("--out")) opts.out_dir = cfg["out"];
  if (cfg.contains("seed_point") && unset("--seed-point")) {
    opts.seed_point = cfg["seed_point"].get<std::vector<double>>();
  }
  if (cfg.contains("mu") && unset("--mu")) {
    opts.mu = cfg["mu"].get<std::vector<double>>();
  }
  if (cfg.contains("deterministic") && unset("--deterministic")) {
    opts.deterministic = cfg["deterministic"].get<bool>();
  }
  if (cfg.contains("threads") && unset("--threads")) opts.threads = cfg["threads"].get<int>();
  if (cfg.contains("tolerances")) {
    const auto& t = cfg["tolerances"];
    if (t.contains("newton") && unset("--newton-tol")) opts.newton_tol = t["newton"];
    if (t.contains("grad") && unset("--grad-tol")) opts.grad_tol = t["grad"];
  }
}

// --------------------------------------------------------------------------
// subcommand bodies
// --------------------------------------------------------------------------

int run_validate(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const double eps_probe = opts.eps_list.front() != 0 ? opts.eps_list.front() : 0.1;
  const auto report = validate(model, sub, opts.samples, opts.rng_seed, eps_probe);
  std::cout << report.summary();

  ordered_json j;
  j["model"] = model.name;
  j["samples"] = opts.samples;
  j["eps_probe"] = eps_probe;
  j["checks"] = ordered_json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"worst", c.worst},
                           {"note", c.note}});
  }
  write_file(fs::path(opts.out_dir) / "validate.json", j.dump(2) + "\n");
  return report.all_pass() ? 0 : 2;
}

int run_find_re(const Options& opts) {
  const Model model = build_model(opts);
  const double eps = opts.eps_list.front();
  FindReOptions fopts;
  fopts.newton.abs_tol = opts.newton_tol;
  fopts.mu_target = to_vec(opts.mu);
  if (!fopts.mu_target && model.re_momentum.size() == model.torus_rank) {
    fopts.mu_target = model.re_momentum;
  }
  Vec seed = to_vec(opts.seed_point).value_or(model.re_seed);
  if (seed.size() == 0) {
    throw std::invalid_argument("no --seed-point and the model has no bundled seed");
  }
  const auto re =
      find_re(model, eps, std::nullopt, seed, Vec::Zero(model.torus_rank), fopts);

  ordered_json j;
  j["converged"] = re.converged;
  j["x"] = vec_json(re.x);
  j["velocity"] = vec_json(re.velocity);
  j["momentum"] = vec_json(re.momentum_value);
  j["residual"] = re.residual;
  j["iters"] = re.iters;
  j["eps"] = re.epsilon;
  write_file(fs::path(opts.out_dir) / "re.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  if (!re.converged) {
    std::cerr << "relative-equilibrium search did not converge\n";
    return 2;
  }
  return 0;
}

int run_decompose(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const auto mode = build_mode(opts);
  const auto pipeline =
      prepare_chart(model, sub, mode, to_vec(opts.seed_point), to_vec(opts.mu));

  ordered_json j;
  j["base_x"] = vec_json(pipeline.base.x);
  j["base_velocity"] = vec_json(pipeline.base.velocity);
  j["base_momentum"] = vec_json(pipeline.base.momentum_value);
  j["orbit"] = mat_json(pipeline.wa.orbit.columns);
  j["symplectic_normal"] = mat_json(pipeline.wa.symplectic_normal.columns);
  j["orbital_complement"] = mat_json(pipeline.wa.orbital_complement.columns);
  j["nondegeneracy"] = {{"space_dim", pipeline.nondegeneracy.space.dim()},
                        {"eigenvalues", vec_json(pipeline.nondegeneracy.eigenvalues)},
                        {"nondegenerate", pipeline.nondegeneracy.nondegenerate},
                        {"signature_positive", pipeline.nondegeneracy.signature.first},
                        {"signature_negative", pipeline.nondegeneracy.signature.second}};
  j["velocity_gap"] = pipeline.chart.velocity_gap;
  j["velocity_hypothesis"] = pipeline.chart.velocity_hypothesis;
  j["chart_radius"] = pipeline.chart.radius;
  j["lattice_complement"] = [&] {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < pipeline.complement.c.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (int jj = 0; jj < pipeline.complement.c.cols(); ++jj) {
        row.push_back(pipeline.complement.c(i, jj));
      }
      rows.push_back(row);
    }
    return rows;
  }();
  write_file(fs::path(opts.out_dir) / "decompose.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_reduce(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const auto mode = build_mode(opts);
  const double eps = opts.eps_list.front();
  const auto pipeline =
      prepare_chart(model, sub, mode, to_vec(opts.seed_point), to_vec(opts.mu));
  const auto grid = build_grid(opts, pipeline.chart.torus_dim());
  const auto rf =
      sample_reduced(model, pipeline.chart, eps, grid, thread_count(opts));

  std::ostringstream os;
  write_reduced_csv(rf, os);
  write_file(fs::path(opts.out_dir) / "reduced.csv", os.str());
  double max_residual = 0;
  for (const auto& s : rf.samples) {
    if (s.converged) max_residual = std::max(max_residual, s.residual);
  }
  std::cout << "sampled " << rf.samples.size() << " nodes, holes " << rf.holes
            << ", max residual " << max_residual << "\n"
            << "wrote " << (fs::path(opts.out_dir) / "reduced.csv").string() << "\n";
  return 0;
}

CensusReport run_census_pipeline(const Options& opts, const Model& model,
                                 const SubtorusInclusion& sub, ReductionMode mode,
                                 double eps, const ChartPipeline& pipeline) {
  const auto grid = build_grid(opts, pipeline.chart.torus_dim());
  const auto rf =
      sample_reduced(model, pipeline.chart, eps, grid, thread_count(opts));
  CensusOptions copts;
  copts.grad_tol = opts.grad_tol;
  const auto located = locate_critical_points(model, pipeline.chart, rf, copts);
  auto report = census_report(model, pipeline.chart, located, eps);

  std::ostringstream os;
  write_reduced_csv(rf, os);
  write_file(fs::path(opts.out_dir) / "reduced.csv", os.str());
  return report;
}

int run_census(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const auto mode = build_mode(opts);
  const double eps = opts.eps_list.front();
  const auto pipeline =
      prepare_chart(model, sub, mode, to_vec(opts.seed_point), to_vec(opts.mu));
  const auto report = run_census_pipeline(opts, model, sub, mode, eps, pipeline);

  write_file(fs::path(opts.out_dir) / "census.json", census_to_json(report) + "\n");
  std::ostringstream os;
  write_census_csv(report, os);
  write_file(fs::path(opts.out_dir) / "census_points.csv", os.str());

  std::cout << "census at eps=" << eps << ": " << report.count
            << " critical points (LS bound " << report.ls_bound << ", Morse bound "
            << report.morse_bound << ")\n"
            << "  ls_satisfied=" << (report.ls_satisfied ? "yes" : "no")
            << " morse_satisfied=" << (report.morse_satisfied ? "yes" : "no")
            << " euler_sum=" << report.euler_sum << "\n";
  if (!report.velocity_hypothesis) {
    std::cout << "  note: base velocity lies outside the subtorus algebra; mapped "
                 "points are frozen-velocity critical points, not certified "
                 "subtorus relative equilibria\n";
  }
  for (const auto& w : report.warnings) std::cout << "  warning: " << w << "\n";
  std::cout << "wrote " << (fs::path(opts.out_dir) / "census.json").string() << "\n";
  return 0;
}

int run_verify(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const double eps = opts.eps_list.front();
  const fs::path census_path = opts.census_path.empty()
                                   ? fs::path(opts.out_dir) / "census.json"
                                   : fs::path(opts.census_path);
  std::ifstream in(census_path);
  if (!in) throw std::invalid_argument("cannot open census report " + census_path.string());
  ordered_json census;
  in >> census;

  const bool certified = census.value("re_certified", true);
  ordered_json j;
  j["census"] = census_path.string();
  j["certified"] = certified;
  j["results"] = ordered_json::array();
  bool all_pass = true;

  int index = 0;
  for (const auto& mj : census["mapped"]) {
    RelativeEquilibrium re;
    const auto x = mj["x"].get<std::vector<double>>();
    re.x = Eigen::Map<const Vec>(x.data(), static_cast<long>(x.size()));
    const auto vel = mj["velocity"].get<std::vector<double>>();
    re.velocity = Eigen::Map<const Vec>(vel.data(), static_cast<long>(vel.size()));
    re.momentum_value = momentum(model, re.x);
    re.residual = mj["residual"].get<double>();
    re.converged = true;
    re.epsilon = eps;

    ordered_json entry;
    entry["index"] = index;
    if (opts.dump_trajectories) {
      const auto traj = integrate(model, eps, re.x, 50.0, 1e-12);
      std::ostringstream os;
      write_trajectory_csv(model, eps, traj, os);
      write_file(fs::path(opts.out_dir) / ("trajectory_" + std::to_string(index) + ".csv"),
                 os.str());
    }
    ++index;
    if (certified) {
      const auto v = verify_re(model, eps, re, sub, {});
      entry["max_orbit_distance"] = v.max_orbit_distance;
      entry["restricted_momentum_drift"] = v.restricted_momentum_drift;
      entry["energy_drift"] = v.energy_drift;
      entry["rate_checked"] = v.rate_checked;
      if (v.rate_checked) {
        entry["advance_rate"] = v.advance_rate;
        entry["rate_rel_error"] = v.rate_rel_error;
      }
      entry["pass"] = v.pass;
      all_pass = all_pass && v.pass;
    } else {
      // not certified as subtorus relative equilibria: re-check the frozen
      // augmented-gradient residual statically
      const Vec aug = evaluate_gradient(model, eps, re.x) -
                      momentum_combination_gradient(model, re.velocity, re.x);
      entry["augmented_residual"] = aug.norm();
      entry["pass"] = aug.norm() <= 1e-8;
      all_pass = all_pass && aug.norm() <= 1e-8;
    }
    j["results"].push_back(entry);
  }

  if (opts.negative_control && census["mapped"].size() > 0) {
    const auto x = census["mapped"][0]["x"].get<std::vector<double>>();
    RelativeEquilibrium re;
    re.x = Eigen::Map<const Vec>(x.data(), static_cast<long>(x.size()));
    Vec bump(re.x.size());
    for (int i = 0; i < bump.size(); ++i) bump(i) = (i % 2 ? -1 : 1) * 1e-2;
    re.x += bump;
    const auto vel = census["mapped"][0]["velocity"].get<std::vector<double>>();
    re.velocity = Eigen::Map<const Vec>(vel.data(), static_cast<long>(vel.size()));
    re.momentum_value = momentum(model, re.x);
    re.residual = 0;  // deliberately claimed, the verification must refute it
    re.converged = true;
    const auto v = verify_re(model, eps, re, sub, {});
    j["negative_control"] = {{"max_orbit_distance", v.max_orbit_distance},
                             {"flagged", !v.pass}};
    if (v.pass) {
      std::cerr << "negative control unexpectedly passed\n";
      all_pass = false;
    }
  }

  write_file(fs::path(opts.out_dir) / "verify.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return all_pass ? 0 : 2;
}

int run_sweep(const Options& opts) {
  const Model model = build_model(opts);
  const auto sub = build_subtorus(opts, model.torus_rank);
  const auto mode = build_mode(opts);
  const auto pipeline =
      prepare_chart(model, sub, mode, to_vec(opts.seed_point), to_vec(opts.mu));

  std::ostringstream summary;
  summary << "eps,count,ls_bound,morse_bound,ls_satisfied,morse_satisfied,"
             "all_nondegenerate,euler_sum\n";
  int idx = 0;
  for (double eps : opts.eps_list) {
    const auto report = run_census_pipeline(opts, model, sub, mode, eps, pipeline);
    write_file(fs::path(opts.out_dir) / ("census_eps" + std::to_string(idx) + ".json"),
               census_to_json(report) + "\n");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", eps);
    summary << buf << "," << report.count << "," << report.ls_bound << ","
            << report.morse_bound << "," << (report.ls_satisfied ? 1 : 0) << ","
            << (report.morse_satisfied ? 1 : 0) << ","
            << (report.all_nondegenerate ? 1 : 0) << "," << report.euler_sum << "\n";
    std::cout << "eps=" << eps << ": count=" << report.count
              << " ls=" << (report.ls_satisfied ? "ok" : "MISS")
              << " morse=" << (report.morse_satisfied ? "ok" : "-") << "\n";
    ++idx;
  }
  write_file(fs::path(opts.out_dir) / "sweep.csv", summary.str());
  std::cout << "wrote " << (fs::path(opts.out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

void add_common(CLI::App* cmd, Options& opts, bool with_eps = true) {
  cmd->add_option("--model", opts.model_name, "builtin model: pendulum | oscillator");
  cmd->add_option("--model-file", opts.model_file, "path to a model config (JSON)");
  cmd->add_option("--param", opts.params,
                  "builtin model parameter key=value (repeatable)");
  cmd->add_option("--subtorus", opts.subtorus,
                  "integer inclusion columns, e.g. '1,1' or '1,0;0,1' (default: trivial)");
  cmd->add_option("--mode", opts.mode, "symplectic | poisson");
  if (with_eps) {
    cmd->add_option_function<std::string>(
        "--eps", [&opts](const std::string& s) { opts.eps_list = parse_double_list(s); },
        "perturbation strength (comma list for sweep)");
  }
  cmd->add_option("--grid", opts.grid, "grid resolution per torus dimension, e.g. 64 or 32,32");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option_function<std::string>(
      "--seed-point", [&opts](const std::string& s) { opts.seed_point = parse_double_list(s); },
      "phase-space seed for the base relative equilibrium");
  cmd->add_option_function<std::string>(
      "--mu", [&opts](const std::string& s) { opts.mu = parse_double_list(s); },
      "momentum target for the base relative equilibrium");
  cmd->add_flag("--deterministic", opts.deterministic,
                "force the serial sweep order (byte-identical outputs)");
  cmd->add_option("--threads", opts.threads,
                  "grid worker threads (default: SYMBREAK_THREADS or 1)");
  cmd->add_option("--newton-tol", opts.newton_tol, "Newton residual tolerance");
  cmd->add_option("--grad-tol", opts.grad_tol, "census gradient-norm tolerance");
  cmd->add_option("--samples", opts.samples, "validation sample count");
  cmd->add_option("--seed", opts.rng_seed, "validation RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forced symmetry breaking of torus-symmetric Hamiltonian systems"};
  app.require_subcommand(1);

  Options opts;
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration (flags override)");

  auto* cmd_validate = app.add_subcommand("validate", "structural model checks");
  auto* cmd_findre = app.add_subcommand("find-re", "locate a relative equilibrium from a seed");
  auto* cmd_decompose =
      app.add_subcommand("decompose", "Witt-Artin splitting and the nondegeneracy report");
  auto* cmd_reduce = app.add_subcommand("reduce", "sample the reduced function to CSV");
  auto* cmd_census =
      app.add_subcommand("census", "critical-point census with count bounds");
  auto* cmd_verify = app.add_subcommand("verify", "dynamical check of a census output");
  auto* cmd_sweep = app.add_subcommand("sweep", "census across an epsilon list");

  for (auto* cmd : {cmd_validate, cmd_findre, cmd_decompose, cmd_reduce, cmd_census,
                    cmd_verify, cmd_sweep}) {
    add_common(cmd, opts);
  }
  cmd_verify->add_option("--census", opts.census_path, "census.json to verify");
  cmd_verify->add_flag("--negative-control", opts.negative_control,
                       "also require that a perturbed start fails");
  cmd_verify->add_flag("--trajectories", opts.dump_trajectories,
                       "write trajectory_<i>.csv for every verified point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // all command-line problems are input errors
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(opts, config_path, *active);

    if (active == cmd_validate) return run_validate(opts);
    if (active == cmd_findre) return run_find_re(opts);
    if (active == cmd_decompose) return run_decompose(opts);
    if (active == cmd_reduce) return run_reduce(opts);
    if (active == cmd_census) return run_census(opts);
    if (active == cmd_verify) return run_verify(opts);
    if (active == cmd_sweep) return run_sweep(opts);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const symbreak::expr::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
