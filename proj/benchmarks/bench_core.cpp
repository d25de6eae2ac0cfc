#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "hoam/analysis.hpp"
#include "hoam/detection.hpp"
#include "hoam/field.hpp"

using namespace hoam;

namespace {

void BM_Propagate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GridSpec g{n, n, 10e-6, 10e-6, 810e-9};
  const auto beam = gaussian_beam(g, 0.3e-3);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(beam, 0.05));
}
BENCHMARK(BM_Propagate)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_MaskTransmission(benchmark::State& state) {
  const auto l = state.range(0);
  const auto mode = RingMode::superposition(l, 0.3);
  const auto mask = SlitMask::fringe_matched(l, 60, 1.0 / 7.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(mask_transmission(mode, mask));
}
BENCHMARK(BM_MaskTransmission)->Arg(1000)->Arg(10010);

void BM_LinearizedTransmission(benchmark::State& state) {
  const auto mode = RingMode::superposition(1000, 0.3);
  auto angular = SlitMask::fringe_matched(1000, 60, 1.0 / 7.0);
  angular.linearization_radius = 2e-3;
  const auto mask = linearize_mask(angular, 0.5).mask;
  for (auto _ : state) benchmark::DoNotOptimize(mask_transmission(mode, mask));
}
BENCHMARK(BM_LinearizedTransmission);

FringeDataset scan_dataset(std::int64_t l) {
  const PairSource src(HybridState::maximally_entangled(l));
  DetectorConfig cfg{1e6, 2e5, 1.5e5, 0.1, 4.68e-9, 0.3, 0};
  FringeDataset data;
  data.tau = {cfg.coincidence_window, 0.0};
  const double period = fringe_period(l);
  std::uint64_t idx = 0;
  for (Basis b : kAllBases) {
    for (int j = 0; j < 16; ++j) {
      const double x = 1.8 * period * j / 15.0;
      cfg.rng_seed = derive_seed(7, idx++);
      auto rec = simulate_counts(src, projector(b), SlitMask::fringe_matched(l, 60, 1.0 / 7.0, x), cfg);
      rec.setting = to_string(b);
      data.records.push_back(rec);
    }
  }
  return data;
}

void BM_SimulateCounts(benchmark::State& state) {
  const PairSource src(HybridState::maximally_entangled(1000));
  DetectorConfig cfg{1e6, 2e5, 1.5e5, 0.1, 4.68e-9, 0.3, 0};
  const auto mask = SlitMask::fringe_matched(1000, 60, 1.0 / 7.0);
  for (auto _ : state) {
    ++cfg.rng_seed;
    benchmark::DoNotOptimize(simulate_counts(src, PolarizationProjector::D(), mask, cfg));
  }
}
BENCHMARK(BM_SimulateCounts);

void BM_FitFringes(benchmark::State& state) {
  const auto data = scan_dataset(1000);
  for (auto _ : state) benchmark::DoNotOptimize(fit_fringes(data, fringe_period(1000), true));
}
BENCHMARK(BM_FitFringes)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
