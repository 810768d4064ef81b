#include <benchmark/benchmark.h>

#include "lcrm/rng.hpp"
#include "lcrm/sampling.hpp"

using namespace lcrm;

namespace {

template <class Kind>
void BM_Column(benchmark::State& state, Kind kind) {
  SamplerSpec spec;
  spec.kind = kind;
  spec.dimension = static_cast<int>(state.range(0));
  const ColumnSampler sampler(spec);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng).data());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Column, gaussian, Gaussian{})->Arg(256)->Arg(1024);
BENCHMARK_CAPTURE(BM_Column, laplace, LaplaceProduct{})->Arg(256)->Arg(1024);
BENCHMARK_CAPTURE(BM_Column, l1_ball, LpBall{1.0})->Arg(256)->Arg(1024);
BENCHMARK_CAPTURE(BM_Column, hit_and_run_l1, HitAndRun{BodySpec{1.0}})->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_AssembleX(benchmark::State& state) {
  SamplerSpec spec;
  spec.kind = LpBall{1.0};
  spec.dimension = static_cast<int>(state.range(0)) / 2;
  const ColumnSampler sampler(spec);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_X(sampler, static_cast<int>(state.range(0)), 7).X.data());
}
BENCHMARK(BM_AssembleX)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
