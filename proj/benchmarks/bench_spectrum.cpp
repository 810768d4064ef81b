#include <benchmark/benchmark.h>

#include "lcrm/ensemble.hpp"
#include "lcrm/green.hpp"
#include "lcrm/mp_model.hpp"
#include "lcrm/sampling.hpp"

using namespace lcrm;

namespace {

SamplerSpec gaussian(int M) {
  SamplerSpec s;
  s.dimension = M;
  return s;
}

void BM_HSpectrum(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto X = assemble_X(gaussian(N / 2), N, 1).X;
  SpectrumOptions opts;
  opts.verify_pairs = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(h_spectrum(X, opts).eigenvalues.data());
  state.SetComplexityN(N);
}
BENCHMARK(BM_HSpectrum)->ArgsProduct({{128, 256, 512, 1024}, {0, 5}})->Unit(benchmark::kMillisecond)->Complexity();

void BM_LocalLawScan(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const MpModel model(N / 2, N);
  const auto s = h_spectrum(assemble_X(gaussian(N / 2), N, 1).X);
  const auto grid = SpectralDomainGrid::make(model, N, 0.1, 20, 10);
  for (auto _ : state) benchmark::DoNotOptimize(local_law_scan(s, model, grid));
}
BENCHMARK(BM_LocalLawScan)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
