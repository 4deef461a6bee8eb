#include <benchmark/benchmark.h>

#include <cmath>

#include "mtl/losses.hpp"
#include "mtl/model.hpp"
#include "mtl/quadrature.hpp"
#include "mtl/theory.hpp"
#include "mtl/train.hpp"

using namespace mtl;

static void BM_LogisticProx(benchmark::State& state) {
  const double b = std::pow(10.0, static_cast<double>(state.range(0)));
  double a = -3.0, sum = 0.0;
  for (auto _ : state) {
    sum += logistic::prox(1.0, a, b);
    a = a > 3.0 ? -3.0 : a + 0.01;
  }
  benchmark::DoNotOptimize(sum);
}
BENCHMARK(BM_LogisticProx)->DenseRange(-2, 4, 2);

static void BM_ExpectedEnvelope(benchmark::State& state) {
  const LossKernel loss(state.range(0) ? LossKind::logistic : LossKind::squared);
  const LabelChannel channel{ModelKind::binary_classification, 0.5, 0.8};
  const QuadratureGrid grid(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_envelope(loss, channel, 1.2, 0.7, 0.9, grid));
  }
}
BENCHMARK(BM_ExpectedEnvelope)->ArgsProduct({{0, 1}, {48, 96}});

// p = 500 ensemble, the size the presets use
static void BM_SolveMultitask(benchmark::State& state) {
  ExperimentConfig c;
  c.num_tasks = static_cast<int>(state.range(0));
  c.ambient_dim = 500;
  c.known_dim = 250;
  c.samples_per_task.assign(c.num_tasks, 250);
  c.rho = 0.8;
  c.gamma1 = 0.01;
  c.gamma2 = 1.0;
  if (state.range(1)) {
    c.loss = LossKind::logistic;
    c.model = ModelKind::binary_classification;
  }
  const auto e = generate_ensemble(c, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_multitask(e, c));
  }
}
BENCHMARK(BM_SolveMultitask)
    ->ArgsProduct({{2, 10}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

static void BM_SolveSymmetric(benchmark::State& state) {
  ScalarProblem p;
  p.alpha = 2.0;
  p.kappa = 1.0;
  p.rho = 0.75;
  p.gamma1 = 0.05;
  p.gamma2 = 0.2;
  p.model = ModelKind::binary_classification;
  if (state.range(0)) p.loss = LossKind::logistic;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_symmetric(3.0, p));
  }
}
BENCHMARK(BM_SolveSymmetric)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
