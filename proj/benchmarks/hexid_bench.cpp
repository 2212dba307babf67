#include <benchmark/benchmark.h>

#include <vector>

#include "hexid/mlp.hpp"
#include "hexid/perpinn.hpp"
#include "hexid/simulation.hpp"
#include "hexid/tape.hpp"

using namespace hexid;

namespace {

Dataset bench_dataset(int runs) {
  RunConfig rc;
  return generate_dataset(runs, 2024, rc, IntegratorConfig{}, default_lumped_params(), ControllerConfig{},
                          FoulingParams{});
}

}  // namespace

// Scalar chain through the tape: forward recording plus one backward sweep.
static void BM_TapeScalarChain(benchmark::State& state) {
  const auto n = state.range(0);
  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    ad::Var x = tape.parameter(0.3);
    ad::Var acc = tape.constant(0.0);
    for (int64_t i = 0; i < n; ++i) acc = acc + ad::tanh(x * static_cast<double>(i % 7 + 1));
    tape.backward(acc);
    benchmark::DoNotOptimize(tape.adjoint(x.id));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TapeScalarChain)->Arg(1000)->Arg(10000);

static void BM_MlpEvaluate(benchmark::State& state) {
  const MlpParams p = init_params({1, 75, 75, 1}, 7);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(1, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mlp_evaluate(p, X));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpEvaluate)->Arg(60)->Arg(1440);

// Fused batch node: forward and gradient with respect to all parameters.
static void BM_MlpBatchGradient(benchmark::State& state) {
  const MlpParams p = init_params({1, 40, 40, 40, 40, 40, 40, 3}, 7);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(1, state.range(0));
  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const MlpBinding b = bind_params(tape, p);
    const std::vector<ad::Var> out = mlp_forward_batch(b, X);
    tape.backward(ad::mean(out));
    benchmark::DoNotOptimize(gradient(b));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBatchGradient)->Arg(60)->Arg(1440);

static void BM_MlpTangentGradient(benchmark::State& state) {
  const MlpParams p = init_params({1, 40, 40, 40, 40, 40, 40, 3}, 7);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(1, state.range(0));
  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const MlpBinding b = bind_params(tape, p);
    const TangentVars tv = mlp_forward_tangent(b, X, 0);
    std::vector<ad::Var> all = tv.out;
    all.insert(all.end(), tv.dout.begin(), tv.dout.end());
    tape.backward(ad::mean(all));
    benchmark::DoNotOptimize(gradient(b));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpTangentGradient)->Arg(1440);

static void BM_SimulateRun(benchmark::State& state) {
  RunConfig rc;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_run(rc, IntegratorConfig{}, default_lumped_params(), ControllerConfig{}, FoulingParams{}));
  }
}
BENCHMARK(BM_SimulateRun)->Unit(benchmark::kMicrosecond);

// One Per-PINN epoch: loss through the integrated trajectories and backward.
static void BM_PerPinnEpoch(benchmark::State& state) {
  const Dataset ds = bench_dataset(static_cast<int>(state.range(0)));
  std::vector<const Run*> runs;
  for (const Run& r : ds.runs) runs.push_back(&r);
  PerPinnModel m;
  m.net = init_params({1, 75, 75, 1}, 1234);
  m.duration = ds.runs.front().back().t;
  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const MlpBinding b = bind_params(tape, m.net);
    const ad::Var loss = perpinn_loss(tape, b, m, runs);
    tape.backward(loss);
    benchmark::DoNotOptimize(gradient(b));
  }
}
BENCHMARK(BM_PerPinnEpoch)->Arg(1)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
