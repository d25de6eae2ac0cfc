#include <doctest.h>

#include <cmath>
#include <random>

#include "hoam/analysis.hpp"
#include "hoam/errors.hpp"
#include "oracles.hpp"

using namespace hoam;
using oracle::kPi;

namespace {

// Noiseless sin^2 fringes of the joint model with per-basis (o, a).
FringeSamples synthetic(double period, double x0, const std::array<std::pair<double, double>, 4>& oa, std::size_t points,
                        double span_fringes = 1.8) {
  FringeSamples s;
  for (Basis b : kAllBases) {
    const auto [o, a] = oa[static_cast<int>(b)];
    for (std::size_t k = 0; k < points; ++k) {
      const double x = period * span_fringes * static_cast<double>(k) / static_cast<double>(points - 1);
      const double ph = kPi * ((x - x0) / period - basis_shift_fraction(b));
      const double y = o + a * std::sin(ph) * std::sin(ph);
      s[static_cast<int>(b)].push_back({x, y, std::sqrt(std::max(y, 1.0))});
    }
  }
  return s;
}

// Mask-scan-like dataset: expected counts per interval, Poisson sampled.
FringeDataset poisson_dataset(double period, double signal_peak, double visibility, double accidentals,
                              std::size_t intervals, std::uint64_t seed, double tau = 4.68e-9) {
  std::mt19937_64 rng(seed);
  FringeDataset d;
  // Singles chosen so that s1 s2 tau / T reproduces `accidentals`.
  const double duration = 300.0;
  const double s1 = 1e5 * duration;
  const double s2 = accidentals * duration / (s1 * tau);
  d.tau = {tau, 0.0};
  for (Basis b : kAllBases) {
    for (std::size_t p = 0; p < 16; ++p) {
      const double x = 1.8 * period * static_cast<double>(p) / 15.0;
      const double ph = kPi * (x / period - basis_shift_fraction(b));
      // Peak signal s at the maximum and s (1 - V)/(1 + V) at the minimum.
      const double o = signal_peak * (1 - visibility) / (1 + visibility);
      const double mean = o + (signal_peak - o) * std::sin(ph) * std::sin(ph) + accidentals;
      for (std::size_t i = 0; i < intervals; ++i) {
        CountRecord r;
        r.setting = to_string(b);
        r.mask_offset = x;
        r.duration = duration;
        r.singles_alice = static_cast<std::uint64_t>(s1);
        r.singles_bob = static_cast<std::uint64_t>(std::llround(s2));
        r.coincidences = std::poisson_distribution<std::uint64_t>(mean)(rng);
        d.records.push_back(r);
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("coincidence window estimator") {
  // 4680 accidentals/s at 1 MHz singles.
  const auto t = estimate_coincidence_window(4680.0, 1e6, 1e6, 1.0);
  CHECK(t.value == doctest::Approx(4.68e-9).epsilon(1e-12));
  // About 190 accidentals give the 7% relative error of 4.68 +- 0.34 ns.
  const double acc = 190.0, dur = 121.0, s1 = 1e5 * dur;
  const double s2 = acc * dur / (s1 * 4.68e-9);
  const auto p = estimate_coincidence_window(acc, s1, s2, dur);
  CHECK(p.value == doctest::Approx(4.68e-9).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(0.34e-9).epsilon(0.01));
  CHECK(p.sigma == doctest::Approx(p.value * std::sqrt(1 / acc + 1 / s1 + 1 / s2)).epsilon(1e-12));

  const auto zero = estimate_coincidence_window(0.0, 1e6, 2e6, 10.0);
  CHECK(zero.value == 0.0);
  CHECK(zero.sigma == doctest::Approx(10.0 / 2e12));
  CHECK_THROWS_AS(estimate_coincidence_window(5.0, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("window estimator is consistent over seeds") {
  std::mt19937_64 rng(21);
  int within = 0;
  const int runs = 200;
  for (int k = 0; k < runs; ++k) {
    const double dur = 121.0;
    const double s1 = std::poisson_distribution<long>(1e5 * dur)(rng);
    const double s2 = std::poisson_distribution<long>(3348.0 * dur)(rng);
    const double acc = std::poisson_distribution<long>(1e5 * 3348.0 * 4.68e-9 * dur)(rng);
    const auto t = estimate_coincidence_window(acc, s1, s2, dur);
    if (std::abs(t.value - 4.68e-9) < 3 * t.sigma) ++within;
  }
  CHECK(within >= 0.97 * runs);
}

TEST_CASE("accidental subtraction") {
  CountRecord r{"D", 0.0, 10.0, 1000000, 1000000, 0};
  const Measured tau{4.68e-9, 0.0};
  const auto acc = expected_accidentals(r, tau);
  CHECK(acc.value == doctest::Approx(1e12 * 4.68e-9 / 10.0));
  r.coincidences = static_cast<std::uint64_t>(std::llround(acc.value));
  CHECK(subtract_accidentals(r, tau, false).value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(subtract_accidentals(r, tau, false).sigma > 0.0);

  r.coincidences = 100;
  CHECK(subtract_accidentals(r, tau, false).value < 0.0);
  CHECK(subtract_accidentals(r, tau, true).value == 0.0);

  const auto iccd = subtract_accidentals(Measured{600, std::sqrt(600.0)}, Measured{200, std::sqrt(200.0)}, false);
  CHECK(iccd.value == 400.0);
  CHECK(iccd.sigma == doctest::Approx(std::sqrt(800.0)));
}

TEST_CASE("unclamped subtraction is unbiased") {
  std::mt19937_64 rng(5);
  const double signal = 40.0, accidentals = 500.0;
  std::vector<double> corrected;
  for (int k = 0; k < 400; ++k) {
    CountRecord r{"D", 0.0, 100.0, 10000000, 0, 0};
    r.singles_bob = static_cast<std::uint64_t>(std::llround(accidentals * 100.0 / (1e7 * 4.68e-9)));
    r.coincidences = std::poisson_distribution<std::uint64_t>(signal + accidentals)(rng);
    corrected.push_back(subtract_accidentals(r, {4.68e-9, 0.0}, false).value);
  }
  const double m = oracle::mean(corrected);
  const double sem = oracle::sample_std(corrected) / std::sqrt(static_cast<double>(corrected.size()));
  CHECK(std::abs(m - signal) < 3 * sem + 0.5);
}

TEST_CASE("noiseless fit recovers the model exactly") {
  const double period = kPi / 1000.0;
  // V = a / (a + 2 o) = 0.9 with a = 18 o.
  const auto s = synthetic(period, 0.37 * period, {{{10, 180}, {10, 180}, {10, 180}, {10, 180}}}, 16);
  const auto fit = fit_fringe_samples(s, period);
  for (Basis b : kAllBases) CHECK(fit[b].visibility.value == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(fit.x0.value == doctest::Approx(0.37 * period).epsilon(1e-6));
  CHECK(fit.chi2 < 1e-12);
  CHECK(fit.dof == 64 - 9);
  CHECK(fit.covariance.size() == 81);
}

TEST_CASE("fit visibilities equal the extrema visibilities of the fitted model") {
  const double period = 2.0;
  const auto s = synthetic(period, 0.81, {{{5, 100}, {20, 60}, {0, 40}, {30, 0.5}}}, 200, 2.0);
  const auto fit = fit_fringe_samples(s, period);
  for (Basis b : kAllBases) {
    const double hi = fit.model(b, fit.max_position(b));
    const double lo = fit.model(b, fit.min_position(b));
    const auto v = visibility_from_extrema({hi, 0.0}, {lo, 0.0});
    CHECK(fit[b].visibility.value == doctest::Approx(v.value).epsilon(1e-9));
  }
  CHECK(fit[Basis::A].visibility.value == doctest::Approx(60.0 / 100.0).epsilon(1e-6));
  CHECK(fit[Basis::R].visibility.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit bounds keep offsets non-negative and visibilities at most one") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double period = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = synthetic(period, 0.2, {{{0, 30}, {0, 30}, {0, 30}, {0, 30}}}, 16);
    for (auto& basis : s) {
      for (auto& p : basis) {
        p.y += 8.0 * noise(rng);
        p.sigma = 8.0;
      }
    }
    const auto fit = fit_fringe_samples(s, period);
    for (Basis b : kAllBases) {
      CHECK(fit[b].offset >= 0.0);
      CHECK(fit[b].amplitude >= 0.0);
      CHECK(fit[b].visibility.value <= 1.0);
      CHECK(fit[b].visibility.value >= 0.0);
    }
    CHECK(fit.starts >= 1);
    CHECK(fit.iterations > 360);
  }
}

TEST_CASE("fit input checks") {
  FringeSamples s = synthetic(1.0, 0.0, {{{1, 1}, {1, 1}, {1, 1}, {1, 1}}}, 8);
  s[2].resize(2);
  CHECK_THROWS_AS(fit_fringe_samples(s, 1.0), DomainError);
  CHECK_THROWS_AS(fit_fringe_samples(synthetic(1.0, 0.0, {{{1, 1}, {1, 1}, {1, 1}, {1, 1}}}, 8), 0.0), DomainError);
}

TEST_CASE("visibility from extrema") {
  CHECK(visibility_from_extrema({100, 10}, {0, 1}).value == 1.0);
  for (double k : {0.01, 1.0, 7.0, 1e6}) {
    CHECK(visibility_from_extrema({83 * k, 0}, {17 * k, 0}).value == doctest::Approx(0.66).epsilon(1e-12));
  }
  CHECK_THROWS_AS(visibility_from_extrema({0, 1}, {0, 1}), UndefinedError);
  CHECK_THROWS_AS(visibility_from_extrema({1, 1}, {2, 1}), DomainError);
  // First-order propagation against a finite-difference oracle.
  const double M = 300, m = 70, sM = 9, sm = 4;
  const double h = 1e-4;
  const double dM = ((M + h - m) / (M + h + m) - (M - h - m) / (M - h + m)) / (2 * h);
  const double dm = ((M - m - h) / (M + m + h) - (M - m + h) / (M + m - h)) / (2 * h);
  CHECK(visibility_from_extrema({M, sM}, {m, sm}).sigma == doctest::Approx(std::hypot(dM * sM, dm * sm)).epsilon(1e-6));
}

TEST_CASE("witness arithmetic") {
  const auto w = witness({0.83, 0.02}, {0.79, 0.02});
  CHECK(w.w.value == doctest::Approx(1.62));
  CHECK(w.w.sigma == doctest::Approx(std::hypot(0.02, 0.02)));
  CHECK(std::abs(w.w.value - 1.626) < w.w.sigma);

  const auto half = witness({0.5, 0.1}, {0.5, 0.1});
  CHECK(half.w.value == 1.0);
  CHECK(half.significance == 0.0);
  CHECK_THROWS_AS(witness({1.2, 0.1}, {0.5, 0.1}), DomainError);

  // Per-basis visibilities of the low-signal fit combine to 1.43 +- 0.25 scale.
  const auto rl = combine_visibilities({1.00, 0.47}, {0.66, 0.15});
  const auto da = combine_visibilities({0.61, 0.13}, {0.58, 0.12});
  CHECK(rl.value == doctest::Approx(0.83));
  CHECK(da.value == doctest::Approx(0.595));
  const auto m1 = witness(da, rl);
  CHECK(m1.w.value == doctest::Approx(1.43).epsilon(0.005));
  CHECK(m1.w.sigma == doctest::Approx(0.25).epsilon(0.1));

  // 1.128 +- 0.013 as rounded is 9.85 sigma; the unrounded values clear 10.
  const auto fig4 = witness({0.564, 0.0092}, {0.564, 0.0092});
  CHECK(fig4.w.value == doctest::Approx(1.128));
  CHECK(fig4.w.sigma == doctest::Approx(0.013).epsilon(0.01));
  CHECK(fig4.significance == doctest::Approx(0.128 / 0.013).epsilon(0.01));
}

TEST_CASE("block statistics of the published ten values") {
  const std::vector<double> v{0.90, 1.42, 1.98, 0.81, 1.16, 1.26, 1.28, 1.75, 1.68, 1.88};
  const auto st = block_statistics(v);
  CHECK(st.n == 10);
  CHECK(st.mean == doctest::Approx(oracle::mean(v)).epsilon(1e-14));
  CHECK(st.sem == doctest::Approx(oracle::sample_std(v) / std::sqrt(10.0)).epsilon(1e-14));
  CHECK(std::round(st.mean * 100) / 100 == doctest::Approx(1.41));
  CHECK(std::round(st.sem * 100) / 100 == doctest::Approx(0.13));

  const std::vector<double> same(7, 1.3);
  CHECK(block_statistics(same).sem == 0.0);
  CHECK_THROWS_AS(block_statistics(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("method 2 on synthetic low-signal data") {
  const double period = kPi / 10010.0;
  const auto data = poisson_dataset(period, 60.0, 0.7, 600.0, 10, 17);
  const auto clamped = witness_blocks(data, period, 10, true);
  const auto raw = witness_blocks(data, period, 10, false);
  CHECK(clamped.blocks.size() == 10);
  CHECK(clamped.intervals_per_block == 1);
  CHECK(clamped.dropped_intervals == 0);
  for (std::size_t k = 0; k < 10; ++k) {
    if (!clamped.blocks[k].defined || !raw.blocks[k].defined) continue;
    for (int b = 0; b < 4; ++b) CHECK(clamped.blocks[k].visibilities[b] >= raw.blocks[k].visibilities[b] - 1e-12);
  }
  CHECK(clamped.stats.mean >= raw.stats.mean - 1e-12);
  // Ground truth W = 2 V = 1.4 for exact extrema on the scan grid.
  CHECK(std::abs(clamped.stats.mean - 1.4) < 3 * clamped.stats.sem + 0.1);
}

TEST_CASE("method 2 drops the trailing remainder") {
  const double period = 1.0;
  const auto data = poisson_dataset(period, 2000.0, 0.9, 10.0, 23, 3);
  const auto r = witness_blocks(data, period, 10, true);
  CHECK(r.intervals_per_block == 2);
  CHECK(r.dropped_intervals == 3);
  CHECK(r.stats.n == 10);
  CHECK_THROWS_AS(witness_blocks(poisson_dataset(period, 100.0, 0.9, 10.0, 5, 3), period, 10, true), DomainError);
}

TEST_CASE("method 1 through fit_fringes") {
  const double period = kPi / 1000.0;
  const auto data = poisson_dataset(period, 5000.0, 0.9, 10.0, 1, 8);
  const auto fit = fit_fringes(data, period, false);
  const auto w = witness_from_fit(fit);
  CHECK(w.w.value == doctest::Approx(1.8).epsilon(0.03));
  CHECK(w.w.sigma > 0.0);
  // D has its minimum at x0 = 0.
  CHECK(std::abs(std::remainder(fit.x0.value, period)) < 0.02 * period);
}

TEST_CASE("group points") {
  FringeDataset d;
  d.records = {{"D", 0.2, 1, 1, 1, 5}, {"D", 0.1, 1, 1, 1, 3}, {"D", 0.2, 1, 1, 1, 7}, {"A", 0.1, 1, 1, 1, 1},
               {"delayed", 0.0, 1, 1, 1, 1}};
  const auto pts = group_points(d, Basis::D);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].offset == 0.1);
  CHECK(pts[1].total.coincidences == 12);
  CHECK(pts[1].parts.size() == 2);
  CHECK(pts[1].parts[0].coincidences == 5);
  CHECK(group_points(d, Basis::R).empty());
}

TEST_CASE("basis labels and shifts") {
  CHECK(basis_from_label("R") == Basis::R);
  CHECK_THROWS_AS(basis_from_label("H"), DomainError);
  CHECK(basis_shift_fraction(Basis::A) == 0.5);
  CHECK(basis_shift_fraction(Basis::R) == 0.75);
  CHECK(basis_shift_fraction(Basis::L) == 0.25);
  CHECK(projector(Basis::D).overlap(PolarizationProjector::D()) == doctest::Approx(1.0));
}

namespace {

std::vector<RotationSample> rotation_series(std::int64_t l, double theta, double fringes, std::size_t per_fringe,
                                            double visibility = 0.9) {
  const auto mode = RingMode::superposition(l, 0.0);
  const double period = 2 * kPi / static_cast<double>(l);
  const auto n = static_cast<std::size_t>(fringes * per_fringe);
  std::vector<RotationSample> s;
  for (std::size_t k = 0; k <= n; ++k) {
    const double alpha = period * fringes * static_cast<double>(k) / static_cast<double>(n);
    const double i = 1.0 + visibility * (rotation_fringe(mode, alpha, theta) - 1.0);
    s.push_back({alpha, 100.0 * i, 1.0});
  }
  return s;
}

}  // namespace

TEST_CASE("noiseless rotation fits recover l") {
  std::vector<std::vector<RotationSample>> positions;
  for (int p = 0; p < 12; ++p) positions.push_back(rotation_series(10010, 2 * kPi * p / 12, 5, 16));
  const auto est = estimate_oam(positions);
  CHECK(est.used == 12);
  for (const auto& p : est.positions) {
    CHECK(p.ok);
    CHECK(p.l.value == doctest::Approx(10010).epsilon(1e-6));
    CHECK(p.fringes == doctest::Approx(5.0).epsilon(1e-6));
  }
  CHECK(est.std < 1e-3);
}

TEST_CASE("doubling l halves the fitted rotation period") {
  for (std::int64_t l : {10, 500, 10010}) {
    const auto a = fit_rotation_series(rotation_series(l, 0.3, 5, 16));
    const auto b = fit_rotation_series(rotation_series(2 * l, 0.3, 5, 16));
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    CHECK(b.period == doctest::Approx(a.period / 2).epsilon(1e-9));
  }
}

TEST_CASE("rotation fits report failures") {
  CHECK_FALSE(fit_rotation_series(rotation_series(100, 0.0, 1, 16)).ok);
  CHECK_FALSE(fit_rotation_series({{0, 1, 1}, {1, 1, 1}}).ok);
  CHECK_THROWS_AS(estimate_oam({rotation_series(100, 0.0, 5, 16)}), DomainError);
  CHECK_THROWS_AS(estimate_oam({rotation_series(100, 0.0, 1, 16), rotation_series(100, 0.1, 1, 16)}), FitError);
  // Mean and population spread over the surviving positions.
  std::vector<std::vector<RotationSample>> pos{rotation_series(1000, 0.0, 5, 16), rotation_series(1100, 0.0, 5, 16),
                                               rotation_series(1000, 0.0, 1, 16)};
  const auto est = estimate_oam(pos);
  CHECK(est.used == 2);
  CHECK(est.mean == doctest::Approx(1050).epsilon(1e-6));
  CHECK(est.std == doctest::Approx(50).epsilon(1e-6));
  CHECK_FALSE(est.positions[2].ok);
  CHECK_FALSE(est.positions[2].failure.empty());
}

TEST_CASE("ring maxima counting") {
  std::vector<double> flat(512, 3.0);
  CHECK(count_ring_maxima(flat) == 0);

  const auto mode = RingMode::superposition(500, 0.3);
  std::vector<double> p(8000);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = ring_intensity(mode, 2 * kPi * k / p.size());
  CHECK(count_ring_maxima(p) == 1000);

  std::vector<double> coarse(3000);
  for (std::size_t k = 0; k < coarse.size(); ++k) coarse[k] = ring_intensity(mode, 2 * kPi * k / coarse.size());
  CHECK_THROWS_AS(count_ring_maxima(coarse), SamplingError);

  // Small ripples below the prominence do not count.
  std::vector<double> rip(720);
  for (std::size_t k = 0; k < rip.size(); ++k) {
    const double t = 2 * kPi * k / rip.size();
    rip[k] = 1 + std::cos(6 * t) + 0.02 * std::cos(60 * t);
  }
  CHECK(count_ring_maxima(rip) == 6);
}
