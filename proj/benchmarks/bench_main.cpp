#include <benchmark/benchmark.h>

#include "trapwalk/env.hpp"
#include "trapwalk/regen.hpp"
#include "trapwalk/walk.hpp"

using namespace trapwalk;

namespace {

FieldConfig pareto_field(double K, double lambda, double x_min = 1.0) {
  FieldConfig f;
  f.law = ConductanceLaw::pareto(0.5, x_min);
  f.K = K;
  f.lambda = lambda;
  f.seed = 42;
  return f;
}

void BM_ConductanceOf(benchmark::State& st) {
  ConductanceField field(pareto_field(20, 1));
  std::int32_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(field.conductance_of(LatticeEdge::from(make_vertex({i, i / 3}), 0, 2)));
    ++i;
  }
}
BENCHMARK(BM_ConductanceOf);

void BM_KernelAt(benchmark::State& st) {
  ConductanceField field(pareto_field(20, 1));
  std::int32_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(kernel_at(field, make_vertex({i, -i / 7})));
    ++i;
  }
}
BENCHMARK(BM_KernelAt);

void BM_RunWalk(benchmark::State& st) {
  ConductanceField field(pareto_field(20, 1));
  const auto steps = st.range(0);
  std::uint64_t seed = 1;
  for (auto _ : st) {
    WalkRng rng(seed++);
    WalkOptions o;
    o.record_path = false;
    benchmark::DoNotOptimize(run_walk(field, Vertex{}, steps, rng, o).end());
  }
  st.SetItemsProcessed(st.iterations() * steps);
}
BENCHMARK(BM_RunWalk)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_CompressedWalk(benchmark::State& st) {
  ConductanceField field(pareto_field(2, 4, 0.5));
  const auto steps = st.range(0);
  std::uint64_t seed = 1;
  for (auto _ : st) {
    WalkRng rng(seed++);
    WalkOptions o;
    o.compress_threshold = 5.0;
    o.record_path = false;
    benchmark::DoNotOptimize(run_walk(field, Vertex{}, steps, rng, o).end());
  }
  st.SetItemsProcessed(st.iterations() * steps);
}
BENCHMARK(BM_CompressedWalk)->Arg(100000000)->Unit(benchmark::kMillisecond);

void BM_Regenerations(benchmark::State& st) {
  ConductanceField field(pareto_field(2, 4, 0.5));
  WalkRng rng(7);
  WalkOptions o;
  o.compress_threshold = 5.0;
  auto traj = run_walk(field, Vertex{}, 1000000000, rng, o);
  RegenConfig rc;
  rc.n_threshold = 100;
  for (auto _ : st) {
    benchmark::DoNotOptimize(detect_regenerations(traj, field, rc).taus.size());
  }
}
BENCHMARK(BM_Regenerations)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
