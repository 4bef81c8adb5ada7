#include <benchmark/benchmark.h>

#include "breakscan/breaktest.hpp"
#include "breakscan/dgp.hpp"
#include "breakscan/ivx.hpp"
#include "breakscan/limitdist.hpp"
#include "breakscan/rng.hpp"

namespace {

using namespace breakscan;

Sample bench_sample(int T) {
  BreakDgp dgp;
  dgp.T = T;
  dgp.beta1 = {0.2};
  dgp.beta2 = {0.2};
  RngStream stream(99);
  return simulate_sample(dgp, stream);
}

void BM_SimulateSample(benchmark::State& state) {
  BreakDgp dgp;
  dgp.T = static_cast<int>(state.range(0));
  dgp.beta1 = {0.2};
  dgp.beta2 = {0.2};
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream stream = derive_stream(1, rep++);
    benchmark::DoNotOptimize(simulate_sample(dgp, stream));
  }
}
BENCHMARK(BM_SimulateSample)->Arg(500)->Arg(2000);

void BM_BuildInstruments(benchmark::State& state) {
  Sample s = bench_sample(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_instruments(s.x, IvxConfig{}));
  }
}
BENCHMARK(BM_BuildInstruments)->Arg(500)->Arg(2000);

void BM_ScanOls(benchmark::State& state) {
  Sample s = bench_sample(static_cast<int>(state.range(0)));
  ScanConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan(s, cfg));
  }
}
BENCHMARK(BM_ScanOls)->Arg(500)->Arg(2000);

void BM_ScanIvx(benchmark::State& state) {
  Sample s = bench_sample(static_cast<int>(state.range(0)));
  ScanConfig cfg;
  cfg.kind = StatKind::WaldIVX;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scan(s, cfg));
  }
}
BENCHMARK(BM_ScanIvx)->Arg(500)->Arg(2000);

void BM_DrawSupNbb(benchmark::State& state) {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::SupNBB;
  spec.grid_points = static_cast<int>(state.range(0));
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream stream = derive_stream(2, rep++);
    benchmark::DoNotOptimize(draw_functional(spec, stream));
  }
}
BENCHMARK(BM_DrawSupNbb)->Arg(500)->Arg(1000)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
