#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "symbreak/census.hpp"
#include "symbreak/dynverify.hpp"
#include "symbreak/modelzoo.hpp"
#include "testutil.hpp"

using namespace symbreak;
using testutil::make_vec;

namespace {

SubtorusInclusion diagonal_sub() {
  Eigen::MatrixXi m(2, 1);
  m << 1, 1;
  return make_subtorus(m);
}

Model free_particle() {
  // H = p on a 2-dimensional chart: the flow is qdot = 1
  Model m;
  m.name = "free-particle";
  m.structure = SymplecticStructure::canonical(1);
  m.torus_rank = 0;
  m.hamiltonian = [](double, const Vec& x) { return x(1); };
  m.hamiltonian_gradient = [](double, const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(1) = 1.0;
    return g;
  };
  m.action = [](const Vec&, const Vec& x) { return x; };
  return m;
}

}  // namespace

TEST_CASE("linear flow integrates exactly") {
  const Model m = free_particle();
  const auto traj = integrate(m, 0.0, Vec::Zero(2), 1.0, 1e-12);
  REQUIRE_FALSE(traj.states.empty());
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(traj.states.back()(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(traj.states.back()(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("oscillator conserves energy and both momenta at eps = 0") {
  const Model osc = make_oscillator({});
  const auto traj = integrate(osc, 0.0, make_vec({1, 1, 0, 0}), 50.0, 1e-12);
  CHECK_FALSE(traj.domain_exit);
  CHECK(traj.energy_drift <= 1e-8);
  CHECK(traj.momentum_drift(0) <= 1e-8);
  CHECK(traj.momentum_drift(1) <= 1e-8);
}

TEST_CASE("broken pendulum conserves energy but not the angular momentum") {
  const Model pend = make_pendulum({});
  const auto traj = integrate(pend, 0.2, make_vec({1.2, 0.4, 0.1, 0.2}), 50.0, 1e-12);
  CHECK(traj.energy_drift <= 1e-8);
  // {H_eps, p_phi} != 0: the drift is of order eps * horizon-scale
  CHECK(traj.momentum_drift(0) > 1e-3);
}

TEST_CASE("orbit distance") {
  const Model osc = make_oscillator({});
  const auto sub = diagonal_sub();
  const Vec ref = make_vec({1, 1, 0, 0});

  CHECK(orbit_distance(osc, ref, ref, sub) <= 1e-12);

  SUBCASE("points on the orbit have zero distance") {
    testutil::Rng rng(3);
    for (int i = 0; i < 10; ++i) {
      const double theta = M_PI * rng();
      const Vec on_orbit = act(osc, sub.real() * make_vec({theta}), ref);
      CHECK(orbit_distance(osc, on_orbit, ref, sub) <= 1e-10);
    }
  }
  SUBCASE("off-orbit points keep a positive distance") {
    CHECK(orbit_distance(osc, make_vec({1, 1, 0.1, 0}), ref, sub) >= 1e-2);
  }
  SUBCASE("r = 0 reduces to the plain norm") {
    const Vec x = make_vec({1.1, 0.9, 0.2, 0.0});
    CHECK(orbit_distance(osc, x, ref, SubtorusInclusion::trivial(2)) ==
          doctest::Approx((x - ref).norm()));
  }
}

TEST_CASE("verify_re on bundled relative equilibria") {
  SUBCASE("pendulum survivor at phi = pi stays put") {
    const Model pend = make_pendulum({});
    const double eps = 0.2;
    // the survivor: solve the frozen r = 0 system from a seed near phi = pi
    FindReOptions opts;
    opts.fixed_velocity = make_vec({0.0});
    const auto re = find_re(pend, eps, SubtorusInclusion::trivial(1),
                            make_vec({M_PI / 2, M_PI, 0, 0}), Vec(), opts);
    REQUIRE(re.converged);
    VerifyOptions vopts;
    vopts.horizon = 50;
    const auto v = verify_re(pend, eps, re, SubtorusInclusion::trivial(1), vopts);
    CHECK(v.max_orbit_distance <= 1e-6);
    CHECK(v.pass);
  }

  SUBCASE("oscillator diagonal relative equilibrium advances at its velocity") {
    const Model osc = make_oscillator({});
    const double eps = 1e-3;
    const auto sub = diagonal_sub();
    // k = pi bifurcated point: x = (-1, 1, 0, 0); grad H_eps there equals
    // (1/2 - eps) grad (I1 + I2), so the subtorus velocity is 1/2 - eps
    RelativeEquilibrium re;
    re.x = make_vec({-1, 1, 0, 0});
    re.velocity = make_vec({0.5 - eps});
    re.momentum_value = momentum(osc, re.x);
    re.residual = recover_velocity(osc, eps, re.x, sub).residual;
    re.converged = true;
    REQUIRE(re.residual <= 1e-10);

    VerifyOptions vopts;
    vopts.horizon = 50;
    const auto v = verify_re(osc, eps, re, sub, vopts);
    CHECK(v.max_orbit_distance <= 1e-6);
    CHECK(v.restricted_momentum_drift <= 1e-8);
    CHECK(v.rate_checked);
    CHECK(v.advance_rate == doctest::Approx(0.5 - eps).epsilon(1e-4));
    CHECK(v.pass);
  }

  SUBCASE("a perturbed non-equilibrium start is flagged") {
    const Model pend = make_pendulum({});
    const double eps = 0.2;
    FindReOptions opts;
    opts.fixed_velocity = make_vec({0.0});
    auto re = find_re(pend, eps, SubtorusInclusion::trivial(1),
                      make_vec({M_PI / 2, M_PI, 0, 0}), Vec(), opts);
    REQUIRE(re.converged);
    // deliberate 1e-2 off-equilibrium shift, keeping the claimed residual
    re.x += make_vec({1e-2, -0.7e-2, 0.5e-2, 0.3e-2});
    re.residual = 0;
    VerifyOptions vopts;
    vopts.horizon = 50;
    const auto v = verify_re(pend, eps, re, SubtorusInclusion::trivial(1), vopts);
    CHECK(v.max_orbit_distance > 1e-3);
    CHECK_FALSE(v.pass);
  }
}

TEST_CASE("trajectory csv export") {
  const Model osc = make_oscillator({});
  const auto traj = integrate(osc, 0.0, make_vec({1, 1, 0, 0}), 1.0, 1e-10);
  std::ostringstream os;
  write_trajectory_csv(osc, 0.0, traj, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,x_1,x_2,x_3,x_4,H,J_1,J_2");
}

TEST_CASE("domain exit truncates with a flag") {
  Model pend = make_pendulum({});
  // start heading toward the pole with plenty of momentum
  const auto traj = integrate(pend, 0.0, make_vec({0.5, 0.0, -1.5, 0.0}), 20.0, 1e-10);
  CHECK(traj.domain_exit);
  CHECK(traj.times.back() < 20.0);
}
