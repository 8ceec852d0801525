#include <benchmark/benchmark.h>

#include <vector>

#include "phonopulse/dsp.hpp"
#include "phonopulse/infer.hpp"
#include "phonopulse/rng.hpp"
#include "phonopulse/synth.hpp"

namespace {

using namespace phonopulse;

PulseConfig bench_pulse(std::size_t n_reps) {
  PulseConfig cfg;
  cfg.f_if = 30e6;
  cfg.sample_rate = 125e6;
  cfg.t_pulse = 5e-6;
  cfg.n_reps = n_reps;
  cfg.base_seed = 1;
  return cfg;
}

SynthTruth bench_truth() {
  SynthTruth truth;
  truth.bath = BathModel{0.7, 0.083e6, 103.094, 0.967e6};
  truth.convention = RateConvention::angular;
  truth.n0 = 0.7;
  truth.alpha_v = 1e-6;
  truth.sigma_imp = 3.07e-3;
  truth.n_floor = 0.6;
  return truth;
}

void BM_SynthesizeEnsemble(benchmark::State& state) {
  const auto cfg = bench_pulse(static_cast<std::size_t>(state.range(0)));
  const auto truth = bench_truth();
  for (auto _ : state) {
    TraceSet set = synthesize_ensemble(cfg, truth, 1);
    benchmark::DoNotOptimize(set.raw().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(cfg.n_samples()));
}
BENCHMARK(BM_SynthesizeEnsemble)->Arg(64)->Arg(256)->Arg(1024);

void BM_PeakArea(benchmark::State& state) {
  const auto cfg = bench_pulse(static_cast<std::size_t>(state.range(0)));
  const TraceSet set = synthesize_ensemble(cfg, bench_truth(), 1);
  const FilterSpec filt = FilterSpec::design(30e6, 6.25e6, cfg.sample_rate);
  for (auto _ : state) {
    PeakAreaSeries series = peak_area(set, filt);
    benchmark::DoNotOptimize(series.area.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(cfg.n_samples()));
}
BENCHMARK(BM_PeakArea)->Arg(64)->Arg(256)->Arg(1024);

void BM_WelchPsd(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> x(1 << 18);
  for (auto& v : x) v = rng.gaussian();
  for (auto _ : state) {
    Spectrum spec = welch_psd(x, 125e6, 8192, 4096);
    benchmark::DoNotOptimize(spec.psd.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_WelchPsd);

void BM_FitHeating(benchmark::State& state) {
  const auto cfg = bench_pulse(512);
  const TraceSet set = synthesize_ensemble(cfg, bench_truth(), 1);
  const FilterSpec filt = FilterSpec::design(30e6, 6.25e6, cfg.sample_rate);
  const PeakAreaSeries series = peak_area(set, filt);
  for (auto _ : state) {
    HeatingFit fit = fit_heating(series);
    benchmark::DoNotOptimize(&fit);
  }
}
BENCHMARK(BM_FitHeating);

}  // namespace

BENCHMARK_MAIN();
