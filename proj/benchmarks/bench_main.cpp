#include "ftc/controller.hpp"
#include "ftc/engine.hpp"
#include "ftc/presets.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_GFunc(benchmark::State& state) {
  const ftc::GFuncParams p;
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ftc::g_func(x, p));
    x = x > 3.0 ? -3.0 : x + 1e-3;
  }
}
BENCHMARK(BM_GFunc);

void BM_ClosedLoopDerivative(benchmark::State& state) {
  const ftc::ClosedLoop loop(ftc::preset("example2"));
  const Eigen::VectorXd X = loop.initial_state();
  for (auto _ : state) {
    benchmark::DoNotOptimize(loop.derivative(1.0, X));
  }
}
BENCHMARK(BM_ClosedLoopDerivative);

void BM_Rk4Step(benchmark::State& state) {
  const ftc::ClosedLoop loop(ftc::preset("example2"));
  Eigen::VectorXd X = loop.initial_state();
  auto rhs = [&loop](double t, const Eigen::VectorXd& x) {
    return loop.derivative(t, x);
  };
  double t = 0.0;
  for (auto _ : state) {
    X = ftc::rk4_step(rhs, X, t, 1e-3);
    t += 1e-3;
    if (t > 20.0) {
      X = loop.initial_state();
      t = 0.0;
    }
  }
}
BENCHMARK(BM_Rk4Step);

void BM_ShortScenario(benchmark::State& state) {
  ftc::Scenario sc = ftc::preset("example2-nominal");
  sc.T = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ftc::run_scenario(sc));
  }
}
BENCHMARK(BM_ShortScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
