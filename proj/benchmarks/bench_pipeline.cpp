#include <benchmark/benchmark.h>

#include <cmath>

#include "symbreak/census.hpp"
#include "symbreak/dynverify.hpp"
#include "symbreak/modelzoo.hpp"

using namespace symbreak;

namespace {

SubtorusInclusion diagonal_sub() {
  Eigen::MatrixXi m(2, 1);
  m << 1, 1;
  return make_subtorus(m);
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

void bm_newton_scalar(benchmark::State& state) {
  auto f = [](const Vec& x) -> Vec {
    Vec r(1);
    r(0) = x(0) * x(0) - 2;
    return r;
  };
  Vec x0(1);
  x0 << 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(newton_solve(f, x0));
  }
}
BENCHMARK(bm_newton_scalar);

void bm_find_re_oscillator(benchmark::State& state) {
  const Model osc = make_oscillator({});
  FindReOptions opts;
  opts.mu_target = Vec(2);
  *opts.mu_target << 0.5, 0.5;
  const Vec seed = vec4(1.05, 0.95, 0.01, -0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_re(osc, 0.0, std::nullopt, seed, Vec::Zero(2), opts));
  }
}
BENCHMARK(bm_find_re_oscillator);

void bm_fiber_solve_pendulum(benchmark::State& state) {
  const Model pend = make_pendulum({});
  const auto pipeline = prepare_chart(pend, SubtorusInclusion::trivial(1),
                                      ReductionMode::Symplectic);
  Vec k(1);
  k << 1.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fiber_solve_continued(pend, pipeline.chart, k, 0.2));
  }
}
BENCHMARK(bm_fiber_solve_pendulum);

void bm_census_oscillator(benchmark::State& state) {
  const Model osc = make_oscillator({});
  const auto pipeline = prepare_chart(osc, diagonal_sub(), ReductionMode::Symplectic);
  const auto grid = std::vector<int>{static_cast<int>(state.range(0))};
  for (auto _ : state) {
    const auto rf = sample_reduced(osc, pipeline.chart, 1e-3, grid);
    benchmark::DoNotOptimize(locate_critical_points(osc, pipeline.chart, rf));
  }
}
BENCHMARK(bm_census_oscillator)->Arg(32)->Arg(64);

void bm_integrate_oscillator(benchmark::State& state) {
  const Model osc = make_oscillator({});
  const Vec x0 = vec4(1, 1, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(osc, 0.0, x0, 10.0, 1e-10));
  }
}
BENCHMARK(bm_integrate_oscillator);

}  // namespace

BENCHMARK_MAIN();
