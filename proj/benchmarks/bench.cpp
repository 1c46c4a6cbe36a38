#include <benchmark/benchmark.h>

#include "fklab/sampler.hpp"

using namespace fklab;

static void BM_ClusterCount(benchmark::State& state) {
  Domain d = build_box((int)state.range(0));
  Rng rng(7, 0);
  EdgeConfiguration cfg(d.n_real_edges);
  for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
  BoundaryPartition bc;
  for (auto _ : state) benchmark::DoNotOptimize(cluster_count(d, cfg, bc));
}
BENCHMARK(BM_ClusterCount)->Arg(2)->Arg(8)->Arg(16);

static void BM_GammaTrace(benchmark::State& state) {
  Domain d = build_slit_domain((int)state.range(0));
  Rng rng(7, 0);
  EdgeConfiguration cfg(d.n_real_edges);
  for (EdgeId e = 0; e < d.n_real_edges; ++e) cfg.set(e, rng.uniform() < 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(trace_gamma(d, cfg).edges.size());
}
BENCHMARK(BM_GammaTrace)->Arg(2)->Arg(4);

static void BM_HeatBathSweep(benchmark::State& state) {
  Domain d = build_box((int)state.range(0));
  MeasureSpec spec{critical_point(2.0), 2.0, "free"};
  HeatBath hb(d, spec);
  Rng rng(7, 0);
  ChainState st;
  st.config = EdgeConfiguration(d.n_real_edges);
  for (auto _ : state) hb.sweep(st, rng);
}
BENCHMARK(BM_HeatBathSweep)->Arg(4)->Arg(16);

static void BM_ChayesMachtaSweep(benchmark::State& state) {
  Domain d = build_box((int)state.range(0));
  MeasureSpec spec{critical_point(2.0), 2.0, "free"};
  ChayesMachta cm(d, spec);
  Rng rng(7, 0);
  ChainState st;
  st.config = EdgeConfiguration(d.n_real_edges);
  for (auto _ : state) cm.sweep(st, rng);
}
BENCHMARK(BM_ChayesMachtaSweep)->Arg(4)->Arg(16)->Arg(32);

static void BM_ExactPassSlit1(benchmark::State& state) {
  Domain d = build_slit_domain(1);
  PassOptions po;
  po.trace_field = true;
  po.threads = 1;
  BoundaryPartition bc;
  for (auto _ : state) benchmark::DoNotOptimize(exact_pass(d, bc, po).n_configs);
}
BENCHMARK(BM_ExactPassSlit1);

BENCHMARK_MAIN();
