#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "symbreak/model.hpp"
#include "symbreak/modelzoo.hpp"
#include "testutil.hpp"

using namespace symbreak;
using testutil::make_vec;

TEST_CASE("subtorus validation") {
  Eigen::MatrixXi diag(2, 1);
  diag << 1, 1;
  CHECK_NOTHROW(make_subtorus(diag));

  Eigen::MatrixXi non_primitive(2, 1);
  non_primitive << 2, 4;
  CHECK_THROWS_AS(make_subtorus(non_primitive), std::invalid_argument);

  Eigen::MatrixXi dependent(2, 2);
  dependent << 1, 1, 1, 1;
  CHECK_THROWS_AS(make_subtorus(dependent), std::invalid_argument);

  CHECK(SubtorusInclusion::trivial(2).rank() == 0);
  CHECK(SubtorusInclusion::identity(3).rank() == 3);
}

TEST_CASE("oscillator evaluation and derived quantities") {
  const Model osc = make_oscillator({});
  const Vec m = make_vec({1, 1, 0, 0});

  // hand evaluation: I = (1/2, 1/2), H_0 = (1/4 + 1/4)/2
  CHECK(evaluate(osc, 0.0, m) == doctest::Approx(0.25).epsilon(1e-14));

  const Vec j = momentum(osc, m);
  CHECK(j(0) == doctest::Approx(0.5));
  CHECK(j(1) == doctest::Approx(0.5));

  Eigen::MatrixXi diag(2, 1);
  diag << 1, 1;
  const auto sub = make_subtorus(diag);
  CHECK(restricted_momentum(osc, sub, m)(0) == doctest::Approx(1.0));

  // coupling value at (1,1,0,0): q1 q2 + p1 p2 = 1
  CHECK(evaluate(osc, 0.3, m) - evaluate(osc, 0.0, m) == doctest::Approx(0.3).epsilon(1e-12));

  SUBCASE("action examples") {
    CHECK((act(osc, make_vec({0, 0}), m) - m).norm() == 0.0);
    const Vec half_turn = act(osc, make_vec({M_PI, 0}), m);
    CHECK((half_turn - make_vec({-1, 1, 0, 0})).norm() < 1e-12);
  }

  SUBCASE("generator examples") {
    CHECK(generator(osc, make_vec({0, 0}), m).norm() == 0.0);
    // P grad I1 = (p1, 0, -q1, 0): the value (0, 0, -1, 0) at q1 = 1, p1 = 0
    // is independent of the second plane, probed inside the domain
    const Vec gen = generator(osc, make_vec({1, 0}), make_vec({1, 0.5, 0, 0}));
    CHECK((gen - make_vec({0, 0, -1, 0})).norm() < 1e-14);
  }

  SUBCASE("gradient matches finite differences") {
    testutil::Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const Vec x = make_vec({1, 1, 0, 0}) + 0.3 * rng.vec(4);
      const Vec analytic = evaluate_gradient(osc, 0.2, x);
      const Vec fd = fd_gradient([&](const Vec& y) { return osc.hamiltonian(0.2, y); }, x);
      CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("pendulum invariance and momentum") {
  const Model pend = make_pendulum({});
  // value at the ring is independent of phi when eps = 0
  const double v0 = evaluate(pend, 0.0, make_vec({M_PI / 2, 0.0, 0, 0}));
  for (double phi : {0.3, 1.7, 4.4}) {
    CHECK(evaluate(pend, 0.0, make_vec({M_PI / 2, phi, 0, 0})) ==
          doctest::Approx(v0).epsilon(1e-14));
  }
  const Vec x = make_vec({1.1, 0.4, 0.2, -0.3});
  CHECK(momentum(pend, x)(0) == doctest::Approx(x(3)));

  // action shifts phi only; generator is the unit phi direction
  const Vec moved = act(pend, make_vec({0.7}), x);
  CHECK(moved(1) == doctest::Approx(x(1) + 0.7));
  CHECK((generator(pend, make_vec({1.0}), x) - testutil::unit(4, 1)).norm() < 1e-12);

  CHECK_THROWS_AS(evaluate(pend, 0.0, make_vec({-0.1, 0, 0, 0})), DomainError);
}

TEST_CASE("group law and momentum invariance on random samples") {
  const Model osc = make_oscillator({});
  testutil::Rng rng(17);
  std::function<double()> unit01 = [&]() { return (rng() + 1) / 2; };
  for (int i = 0; i < 40; ++i) {
    const Vec x = sample_point(osc, unit01);
    const Vec t1 = rng.vec(2), t2 = rng.vec(2);
    const Vec lhs = act(osc, t1, act(osc, t2, x));
    const Vec rhs = act(osc, t1 + t2, x);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((act(osc, Vec::Zero(2), x) - x).norm() == 0.0);
    CHECK((momentum(osc, act(osc, t1, x)) - momentum(osc, x)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("poisson bracket structure") {
  const Model osc = make_oscillator({});
  testutil::Rng rng(23);

  auto i1 = osc.momentum_components[0];
  auto i2 = osc.momentum_components[1];

  for (int i = 0; i < 20; ++i) {
    const Vec x = make_vec({1, 1, 0, 0}) + 0.4 * rng.vec(4);
    CHECK(std::abs(poisson_bracket(osc, i1, i2, x)) < 1e-8);
    auto h0 = [&](const Vec& y) { return osc.hamiltonian(0.0, y); };
    CHECK(std::abs(poisson_bracket(osc, h0, i1, x)) < 1e-8);
  }

  // {q, p} = +1 convention
  auto q1 = [](const Vec& y) { return y(0); };
  auto p1 = [](const Vec& y) { return y(2); };
  CHECK(poisson_bracket(osc, q1, p1, make_vec({1, 1, 0.2, 0.1})) == doctest::Approx(1.0).epsilon(1e-8));

  SUBCASE("broken symmetry has a nonzero bracket at generic points") {
    // {H_eps, I1} = eps (q2 p1 - q1 p2) by hand differentiation of the
    // coupling; it vanishes on the diagonal circle, so probe off it
    const double eps = 0.1;
    auto heps = [&](const Vec& y) { return osc.hamiltonian(eps, y); };
    const Vec x = make_vec({1.0, 1.0, 0.5, -0.3});
    const double expected = eps * (x(1) * x(2) - x(0) * x(3));
    CHECK(expected == doctest::Approx(0.08));
    CHECK(poisson_bracket(osc, heps, i1, x) == doctest::Approx(expected).epsilon(1e-6));
  }

  SUBCASE("antisymmetry and bilinearity on random triples") {
    for (int i = 0; i < 10; ++i) {
      const Vec x = make_vec({1, 1, 0, 0}) + 0.4 * rng.vec(4);
      auto f = [&](const Vec& y) { return y(0) * y(1) + std::sin(y(2)); };
      auto g = [&](const Vec& y) { return y(3) * y(3) - y(0); };
      auto h = [&](const Vec& y) { return y(1) + 2 * y(2); };
      const double fg = poisson_bracket(osc, f, g, x);
      const double gf = poisson_bracket(osc, g, f, x);
      CHECK(fg == doctest::Approx(-gf).epsilon(1e-8));
      auto fg_sum = [&](const Vec& y) { return f(y) + 2.5 * h(y); };
      const double lhs = poisson_bracket(osc, fg_sum, g, x);
      const double rhs = fg + 2.5 * poisson_bracket(osc, h, g, x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
    }
  }
}

TEST_CASE("validate on the bundled models") {
  Eigen::MatrixXi diag(2, 1);
  diag << 1, 1;
  const auto sub = make_subtorus(diag);

  SUBCASE("oscillator with the diagonal subtorus passes everything") {
    const Model osc = make_oscillator({});
    const auto report = validate(osc, sub, 128, 20240901, 0.1);
    for (const auto& check : report.checks) {
      INFO(check.name, " worst=", check.worst);
      CHECK(check.pass);
    }
  }

  SUBCASE("pendulum with r = 0 reports intended breaking") {
    const Model pend = make_pendulum({});
    const auto report = validate(pend, SubtorusInclusion::trivial(1), 64, 7, 0.2);
    bool found_probe = false;
    for (const auto& check : report.checks) {
      INFO(check.name, " worst=", check.worst);
      if (check.name == "heps-breaking-probe") {
        found_probe = true;
        CHECK(check.pass);
        CHECK(check.note == "broken as intended");
      } else {
        CHECK(check.pass);
      }
    }
    CHECK(found_probe);
  }

  SUBCASE("deliberately non-commuting momentum fails with magnitude near one") {
    Model bad = make_oscillator({});
    bad.momentum_components[1] = [](const Vec& x) { return x(0); };
    bad.momentum_component_gradients[1] = [](const Vec& x) {
      Vec g = Vec::Zero(x.size());
      g(0) = 1.0;
      return g;
    };
    const auto report = validate(bad, sub, 128, 20240901, 0.1);
    bool commute_failed = false;
    for (const auto& check : report.checks) {
      if (check.name == "momenta-commute") {
        commute_failed = !check.pass;
        // {I1, q1} = -p1, order-one magnitude on the sample box
        CHECK(check.worst > 0.3);
        CHECK(check.worst < 2.0);
      }
    }
    CHECK(commute_failed);
  }

  SUBCASE("validation is deterministic for a fixed seed") {
    const Model osc = make_oscillator({});
    const auto a = validate(osc, sub, 64, 99, 0.1);
    const auto b = validate(osc, sub, 64, 99, 0.1);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].worst == b.checks[i].worst);
    }
  }
}

TEST_CASE("generator consistency with the action derivative") {
  const Model osc = make_oscillator({});
  testutil::Rng rng(31);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const Vec x = make_vec({1, 1, 0, 0}) + 0.3 * rng.vec(4);
    for (int dir = 0; dir < 2; ++dir) {
      Vec xi = Vec::Zero(2);
      xi(dir) = 1.0;
      Vec tp = Vec::Zero(2), tm = Vec::Zero(2);
      tp(dir) = h;
      tm(dir) = -h;
      const Vec fd = (act(osc, tp, x) - act(osc, tm, x)) / (2 * h);
      CHECK((fd - generator(osc, xi, x)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}
