#include <benchmark/benchmark.h>

#include "lcrm/mp_model.hpp"
#include "lcrm/tw_dist.hpp"

using namespace lcrm;

namespace {

void BM_Stieltjes(benchmark::State& state) {
  const MpModel model(0.5);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stieltjes(cplx(x, 1e-3), model));
    x = x > 3.0 ? 0.1 : x + 1e-3;
  }
}
BENCHMARK(BM_Stieltjes);

void BM_MpCdf(benchmark::State& state) {
  const MpModel model(0.5);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mp_cdf(x, model, 1));
    x = x > 2.9 ? 0.1 : x + 1e-3;
  }
}
BENCHMARK(BM_MpCdf);

void BM_ClassicalLocations(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(classical_locations(N / 2, N).data());
}
BENCHMARK(BM_ClassicalLocations)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_Tw1Oracle(benchmark::State& state) {
  OracleParams p;
  p.nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tw1_oracle_cdf(-1.0, p));
}
BENCHMARK(BM_Tw1Oracle)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Tw1TableCdf(benchmark::State& state) {
  const auto& t = tw1_table();
  double s = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.cdf(s));
    s = s > 5.0 ? -5.0 : s + 0.01;
  }
}
BENCHMARK(BM_Tw1TableCdf);

}  // namespace
