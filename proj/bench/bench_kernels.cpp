// Serial-vs-OpenMP benchmarks for the whole-table kernels and the training
// round. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include "pmrl/backup.hpp"
#include "pmrl/diag.hpp"
#include "pmrl/engine.hpp"
#include "pmrl/family_builders.hpp"

namespace {

using namespace pmrl;

TabularTask bench_task() {
    RngStream rng(1);
    return make_random_task(0, 512, 4, 0.95, 1.0, rng);
}

void BM_RegularizedSweep(benchmark::State& state) {
    const Exec exec = state.range(0) ? Exec::OpenMP : Exec::Serial;
    const auto task = bench_task();
    RngStream rng(2);
    QTable q = QTable::zeros_like(task);
    QTable meta = QTable::zeros_like(task);
    QTable out = QTable::zeros_like(task);
    for (double& v : q.values()) v = rng.uniform(-1.0, 1.0);
    for (auto _ : state) {
        regularized_sweep(task, q, meta, 10.0, out, exec);
        benchmark::DoNotOptimize(out.values().data());
    }
}
BENCHMARK(BM_RegularizedSweep)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_SolveFixedPoint(benchmark::State& state) {
    const Exec exec = state.range(0) ? Exec::OpenMP : Exec::Serial;
    const auto family = make_mountaincar_family({3.0}, {32, 32}, 0.99);
    const auto& task = family.task(0);
    const QTable meta = QTable::zeros_like(task);
    for (auto _ : state) {
        auto res = solve_fixed_point(task, meta, 10.0, 1e-10, 200000, exec);
        benchmark::DoNotOptimize(res.q.values().data());
    }
}
BENCHMARK(BM_SolveFixedPoint)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_ContractionScan(benchmark::State& state) {
    const Exec exec = state.range(0) ? Exec::OpenMP : Exec::Serial;
    const auto task = bench_task();
    const QTable meta = QTable::zeros_like(task);
    for (auto _ : state) {
        RngStream rng(3);
        benchmark::DoNotOptimize(check_contraction(task, meta, 10.0, 20, rng, exec));
    }
}
BENCHMARK(BM_ContractionScan)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_TrainingRound(benchmark::State& state) {
    const Exec exec = state.range(0) ? Exec::OpenMP : Exec::Serial;
    const auto family = make_gridworld_family({8, 9, 10, 11, 12, 13, 14, 15}, 0, 0.5);
    PersonalizationConfig cfg;
    cfg.lambda = 10.0;
    cfg.eta_personalized = 1.0 / 11.0;
    cfg.eta_aux = 0.05;
    cfg.rounds = 1;
    cfg.alternations = 3;
    cfg.explore_horizon = 60;
    cfg.eps_start = 1.0;
    cfg.eps_finish = 1.0;
    cfg.eval_episodes = 100;
    cfg.eval_horizon = 40;
    for (auto _ : state) {
        auto result = run_training(family, cfg, exec);
        benchmark::DoNotOptimize(result.state.meta.values().data());
    }
}
BENCHMARK(BM_TrainingRound)->Arg(0)->Arg(1)->ArgNames({"omp"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
