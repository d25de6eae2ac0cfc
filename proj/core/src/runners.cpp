#include "hoam/runners.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hoam/errors.hpp"
#include "hoam/field.hpp"
#include "hoam/io.hpp"
#include "hoam/spm.hpp"

#ifndef HOAM_VERSION
#define HOAM_VERSION "0.0.0"
#endif

namespace hoam {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

json measured(const Measured& m) { return {{"value", m.value}, {"sigma", m.sigma}}; }

json witness_json(const WitnessResult& w) {
  return {{"v_da", measured(w.v_da)}, {"v_rl", measured(w.v_rl)}, {"w", measured(w.w)},
          {"significance", w.significance}};
}

json envelope(const Scenario& s, json result) {
  return {{"tool", "hoam"}, {"version", version()}, {"scenario", to_json(s)}, {"result", std::move(result)}};
}

std::size_t next_pow2(double n) {
  std::size_t p = 16;
  while (static_cast<double>(p) < n && p < (std::size_t{1} << 40)) p <<= 1;
  return p;
}

std::uint64_t seed_of(const Scenario& s) { return s.seed.value_or(0); }

// Visibility of two extremal counts; negative corrected counts are limited
// to the physical range first.
Measured extremal_visibility(Measured hi, Measured lo) {
  hi.value = std::max(hi.value, 0.0);
  lo.value = std::clamp(lo.value, 0.0, hi.value);
  if (!(hi.value > 0.0)) return {0.0, 1.0};
  return visibility_from_extrema(hi, lo);
}

std::string profile_csv(const std::vector<double>& profile) {
  std::string out = "theta_rad,intensity\n";
  const double n = static_cast<double>(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) {
    out += io::format_double(2.0 * kPi * static_cast<double>(k) / n) + ',' + io::format_double(profile[k]) + '\n';
  }
  return out;
}

}  // namespace

const char* version() { return HOAM_VERSION; }

void write_outputs(const RunOutput& out, const std::filesystem::path& dir, const std::set<std::string>& formats) {
  const auto wanted = [&](const std::string& f) { return formats.empty() || formats.count(f) > 0; };
  if (wanted("json")) io::write_atomic(dir / "report.json", out.report.dump(2) + "\n");
  for (const auto& a : out.artifacts) {
    if (wanted(a.format)) io::write_atomic(dir / a.name, a.contents);
  }
}

// ---------------------------------------------------------------- render-mode

RenderResult render_mode(const Scenario& s) {
  const auto& r = s.render;
  const auto pol = PolarizationProjector::from_label(s.source.polarization);
  const std::int64_t l = s.source.l();
  const RingMode mode = laser_mode(pol, l);
  RenderResult out{l, s.ring_model, {}, 0.0, 0, std::nullopt, std::nullopt, std::nullopt};

  if (s.ring_model) {
    const std::size_t n = r.ring_samples ? r.ring_samples : std::max<std::size_t>(16 * static_cast<std::size_t>(l), 1024);
    out.profile.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.profile[k] = ring_intensity(mode, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    }
    out.maxima = count_ring_maxima(out.profile, r.prominence);
    return out;
  }

  const GridSpec grid{r.grid, r.grid, r.dx, r.dx, s.source.wavelength};
  grid.validate();
  const auto beam = gaussian_beam(grid, r.waist);
  const SpmProfile plus(l, r.segments, s.source.wavelength, r.uncut_radius, r.rotation);
  const SpmProfile minus(-l, r.segments, s.source.wavelength, r.uncut_radius, r.rotation);
  auto field = mode.c_plus * apply_pixel_phase(beam, phase_map(plus));
  field += mode.c_minus * apply_pixel_phase(beam, phase_map(minus));
  if (r.focal_length > 0.0) {
    const double k = 2.0 * kPi / s.source.wavelength;
    const double f = r.focal_length;
    field = apply_phase(std::move(field), [k, f](double x, double y) { return -k * (x * x + y * y) / (2.0 * f); });
  }

  ComplexField far(grid);
  try {
    far = propagate(field, r.distance);
  } catch (const SamplingError& e) {
    const double ratio = e.nyquist_ratio();
    const double need = std::isfinite(ratio) && ratio > 0.0 ? static_cast<double>(r.grid) * ratio
                                                            : 4.0 * static_cast<double>(l);
    const std::size_t n_req = next_pow2(std::max(need, 4.0 * static_cast<double>(l)));
    std::ostringstream msg;
    msg << "l = " << l << " aliases on a " << r.grid << "x" << r.grid << " grid; a full-grid run needs at least "
        << n_req << "x" << n_req << " samples at the same extent (or use the ring model)";
    throw SamplingError(msg.str(), ratio);
  }
  auto img = intensity(far);
  out.ring_radius = peak_ring_radius(img, grid);
  const std::size_t n = r.ring_samples ? r.ring_samples : std::max<std::size_t>(64 * static_cast<std::size_t>(l), 1024);
  out.profile = azimuthal_profile(img, grid, out.ring_radius, n);
  out.maxima = count_ring_maxima(out.profile, r.prominence);
  const double peak = *std::max_element(img.values.begin(), img.values.end());
  out.on_axis_null = peak > 0.0 ? img(grid.nx / 2, grid.ny / 2) / peak : 0.0;
  out.image = std::move(img);
  out.grid = grid;
  return out;
}

RunOutput run_render_mode(const Scenario& s) {
  const auto res = render_mode(s);
  RunOutput out;
  json result{{"l", res.l}, {"ring_model", res.ring_model}, {"maxima", res.maxima},
              {"expected_maxima", 2 * res.l}, {"profile_samples", res.profile.size()}};
  const auto pol = PolarizationProjector::from_label(s.source.polarization);
  try {
    result["orientation_deg"] = pattern_orientation(laser_mode(pol, res.l));
  } catch (const UndefinedError&) {
    result["orientation_deg"] = nullptr;
  }
  out.artifacts.push_back({"ring_profile.csv", "csv", profile_csv(res.profile)});
  if (res.image) {
    result["ring_radius_m"] = res.ring_radius;
    result["on_axis_null"] = *res.on_axis_null;
    out.artifacts.push_back({"intensity.pgm", "pgm", io::to_pgm16(*res.image)});
    out.artifacts.push_back({"intensity.csv", "csv", io::to_csv(*res.image, *res.grid)});
    const SpmProfile mirror(res.l, s.render.segments, s.source.wavelength, s.render.uncut_radius, s.render.rotation);
    out.artifacts.push_back(
        {"heightmap.pgm", "pgm", io::to_pgm16(export_heightmap(mirror, *res.grid), mirror.max_depth())});
  } else {
    // Unrolled ring: angle across, a Gaussian radial profile down.
    const std::size_t w = std::min<std::size_t>(res.profile.size(), 4096);
    RealImage strip(w, 32);
    for (std::size_t j = 0; j < 32; ++j) {
      const double g = std::exp(-std::pow((static_cast<double>(j) - 15.5) / 8.0, 2));
      for (std::size_t i = 0; i < w; ++i) strip(i, j) = g * res.profile[i];
    }
    out.artifacts.push_back({"ring_unrolled.pgm", "pgm", io::to_pgm16(strip)});
    result["on_axis_null"] = nullptr;
  }
  out.report = envelope(s, std::move(result));
  return out;
}

// ------------------------------------------------------- rotation-calibration

std::vector<std::vector<RotationSample>> simulate_rotation_fringes(const Scenario& s) {
  const auto& r = s.rotation;
  const double l = static_cast<double>(s.source.l());
  const double period = 2.0 * kPi / l;
  const auto n = static_cast<std::size_t>(std::llround(r.fringes * static_cast<double>(r.samples_per_fringe))) + 1;
  const double step = period / static_cast<double>(r.samples_per_fringe);
  const double noiseless_scale = 1000.0;

  std::vector<std::vector<RotationSample>> out;
  for (std::size_t p = 0; p < r.positions; ++p) {
    std::mt19937_64 rng(derive_seed(seed_of(s), p));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double psi = 2.0 * kPi * static_cast<double>(p) / static_cast<double>(r.positions);
    const double scale = 1.0 + r.squeeze_amplitude * std::cos(psi - r.squeeze_phase_deg * kDeg) + r.scale_bias;
    const double offset = r.stage_offset_deg > 0.0 ? r.stage_offset_deg * kDeg * gauss(rng) : 0.0;
    std::vector<RotationSample> series;
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = static_cast<double>(k) * step;
      const double jitter = r.jitter_deg > 0.0 ? r.jitter_deg * kDeg * gauss(rng) : 0.0;
      const double true_alpha = alpha + offset + jitter;
      // The -l arm turned by alpha gains exp(i l alpha); the local fringe density
      // seen at psi is l * scale.
      const double rel = 1.0 + r.visibility * std::cos(2.0 * l * psi - l * scale * true_alpha);
      if (r.counts > 0.0) {
        std::poisson_distribution<std::uint64_t> pois(r.counts * rel);
        const double c = static_cast<double>(pois(rng));
        series.push_back({alpha, c, std::sqrt(std::max(c, 1.0))});
      } else {
        series.push_back({alpha, noiseless_scale * rel, 1.0});
      }
    }
    out.push_back(std::move(series));
  }
  return out;
}

RunOutput run_rotation_calibration(const Scenario& s) {
  const auto series = simulate_rotation_fringes(s);
  const auto est = estimate_oam(series);
  const double l = static_cast<double>(s.source.l());
  RunOutput out;
  std::string csv = "position,psi_deg,alpha_rad,intensity,sigma\n";
  json positions = json::array();
  double half_period_sum = 0.0;
  for (std::size_t p = 0; p < series.size(); ++p) {
    const double psi = 360.0 * static_cast<double>(p) / static_cast<double>(series.size());
    for (const auto& smp : series[p]) {
      csv += std::to_string(p) + ',' + io::format_double(psi) + ',' + io::format_double(smp.alpha) + ',' +
             io::format_double(smp.intensity) + ',' + io::format_double(smp.sigma) + '\n';
    }
    const auto& f = est.positions[p];
    json pj{{"position", p}, {"psi_deg", psi}, {"ok", f.ok}};
    if (f.ok) {
      pj["l"] = measured(f.l);
      pj["period_deg"] = f.period / kDeg;
      pj["fringes"] = f.fringes;
      half_period_sum += f.period / 2.0;
    } else {
      pj["failure"] = f.failure;
    }
    positions.push_back(std::move(pj));
  }
  json result{{"l_true", s.source.l()},
              {"positions", positions},
              {"mean", est.mean},
              {"std", est.std},
              {"used", est.used},
              {"excluded", series.size() - est.used},
              {"deviation", est.mean - l},
              {"within_one_sigma", std::abs(est.mean - l) <= est.std},
              {"max_to_min_deg", 180.0 / l},
              {"fitted_max_to_min_deg", half_period_sum / static_cast<double>(est.used) / kDeg}};
  out.artifacts.push_back({"rotation_fringes.csv", "csv", std::move(csv)});
  out.report = envelope(s, std::move(result));
  return out;
}

// ---------------------------------------------------------- iccd-entanglement

IccdRun simulate_iccd(const Scenario& s) {
  const auto& spec = s.iccd;
  const GridSpec grid{spec.nx, spec.ny, spec.config.pixel_pitch, spec.config.pixel_pitch, s.source.wavelength};
  const auto env = annular_envelope(grid, spec.ring_radius, spec.ring_width, spec.config.axis);
  const auto source = s.source.pair_source();
  const std::uint64_t seed = seed_of(s);

  IccdRun run{grid, {}, {}, {}};
  for (Basis b : kAllBases) {
    IccdConfig cfg = spec.config;
    cfg.bob_efficiency *= s.alice.efficiency(b);
    cfg.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(b));
    run.stacks[static_cast<int>(b)] = simulate_iccd_stack(source, s.alice.projector(b), env, cfg);
  }
  IccdConfig bcfg = spec.config;
  bcfg.rng_seed = derive_seed(seed, 4);
  run.background = simulate_iccd_background(env, bcfg);

  // Fold every pixel by its fringe phase l theta / pi (mod 1).
  const double l = static_cast<double>(s.source.l());
  const std::size_t bins = spec.phase_bins;
  std::vector<std::size_t> bin_of(grid.size());
  const auto [ax, ay] = spec.config.axis;
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      double t = l * std::atan2(grid.y(j) - ay, grid.x(i) - ax) / kPi;
      t -= std::floor(t);
      bin_of[j * grid.nx + i] = std::min(bins - 1, static_cast<std::size_t>(t * static_cast<double>(bins)));
    }
  }
  auto& an = run.analysis;
  const auto fold = [&](const CountImage& img) {
    std::vector<double> f(bins, 0.0);
    for (std::size_t k = 0; k < img.counts.size(); ++k) f[bin_of[k]] += static_cast<double>(img.counts[k]);
    return f;
  };
  an.folded_background = fold(run.background);
  FringeSamples corrected;
  for (Basis b : kAllBases) {
    const int k = static_cast<int>(b);
    an.folded[k] = fold(run.stacks[k]);
    for (std::size_t q = 0; q < bins; ++q) {
      const double c = an.folded[k][q];
      const double g = an.folded_background[q];
      corrected[k].push_back({(static_cast<double>(q) + 0.5) / static_cast<double>(bins), c - g,
                              std::sqrt(std::max(c, 1.0) + std::max(g, 1.0))});
    }
  }
  const auto pilot = fit_fringe_samples(corrected, 1.0);
  const auto nearest_bin = [&](double pos) {
    return static_cast<std::size_t>(std::floor(pos * static_cast<double>(bins))) % bins;
  };
  for (Basis b : kAllBases) {
    const int k = static_cast<int>(b);
    const std::size_t hi = nearest_bin(pilot.max_position(b));
    const std::size_t lo = nearest_bin(pilot.min_position(b));
    an.max_bin[k] = hi;
    an.min_bin[k] = lo;
    an.corrected[k] = extremal_visibility({corrected[k][hi].y, corrected[k][hi].sigma},
                                          {corrected[k][lo].y, corrected[k][lo].sigma});
    const double rh = an.folded[k][hi];
    const double rl = an.folded[k][lo];
    an.uncorrected[k] = extremal_visibility({rh, std::sqrt(std::max(rh, 1.0))}, {rl, std::sqrt(std::max(rl, 1.0))});
  }
  const auto w = [&](const std::array<Measured, 4>& v) {
    return witness(combine_visibilities(v[0], v[1]), combine_visibilities(v[2], v[3]));
  };
  an.witness_corrected = w(an.corrected);
  an.witness_uncorrected = w(an.uncorrected);
  return run;
}

RunOutput run_iccd_entanglement(const Scenario& s) {
  const auto run = simulate_iccd(s);
  const auto& an = run.analysis;
  const auto& cfg = s.iccd.config;
  const double frames = static_cast<double>(cfg.frames);
  RunOutput out;
  json bases = json::object();
  std::string folded = "bin,phase,D,A,R,L,background\n";
  for (std::size_t q = 0; q < an.folded_background.size(); ++q) {
    folded += std::to_string(q) + ',' +
              io::format_double((static_cast<double>(q) + 0.5) / static_cast<double>(an.folded_background.size()));
    for (int k = 0; k < 4; ++k) folded += ',' + io::format_double(an.folded[k][q]);
    folded += ',' + io::format_double(an.folded_background[q]) + '\n';
  }
  for (Basis b : kAllBases) {
    const int k = static_cast<int>(b);
    const std::string name = std::string("stack_") + to_string(b);
    const auto& img = run.stacks[k];
    bases[to_string(b)] = {{"counts_per_frame", static_cast<double>(img.total()) / frames},
                           {"corrected_visibility", measured(an.corrected[k])},
                           {"uncorrected_visibility", measured(an.uncorrected[k])},
                           {"max_bin", an.max_bin[k]},
                           {"min_bin", an.min_bin[k]}};
    out.artifacts.push_back({name + ".pgm", "pgm", io::to_pgm16(img.nx, img.ny, img.counts)});
    json sidecar{{"tool", "hoam"}, {"version", version()}, {"basis", to_string(b)},
                 {"seed", derive_seed(seed_of(s), static_cast<std::uint64_t>(b))},
                 {"frames", cfg.frames}, {"exposure_per_frame", cfg.exposure_per_frame},
                 {"total_counts", img.total()}, {"scenario", to_json(s)}};
    out.artifacts.push_back({name + ".json", "json", sidecar.dump(2) + "\n"});
  }
  out.artifacts.push_back(
      {"stack_background.pgm", "pgm", io::to_pgm16(run.background.nx, run.background.ny, run.background.counts)});
  out.artifacts.push_back({"folded.csv", "csv", std::move(folded)});
  json result{{"l", s.source.l()},
              {"bases", bases},
              {"background_per_frame", static_cast<double>(run.background.total()) / frames},
              {"witness_corrected", witness_json(an.witness_corrected)},
              {"witness_uncorrected", witness_json(an.witness_uncorrected)}};
  out.report = envelope(s, std::move(result));
  return out;
}

// ---------------------------------------------------------- mask-entanglement

std::vector<double> scan_offsets(const Scenario& s) {
  const auto& m = s.mask;
  const double span = m.scan_fringes * s.mask_period();
  std::vector<double> out(m.points);
  for (std::size_t j = 0; j < m.points; ++j) {
    out[j] = m.start_offset + span * static_cast<double>(j) / static_cast<double>(m.points - 1);
  }
  return out;
}

MaskScan simulate_mask_scan(const Scenario& s) {
  const auto& d = s.detector;
  const auto source = s.source.pair_source();
  const auto offsets = scan_offsets(s);
  const std::uint64_t seed = seed_of(s);
  DetectorConfig base{d.pair_rate, d.singles_alice, d.singles_bob, d.efficiency_bob, d.coincidence_window,
                      d.interval, 0};

  std::vector<SlitMask> masks;
  for (double x : offsets) masks.push_back(s.slit_mask(x));
  std::array<PolarizationProjector, 4> alice{s.alice.projector(Basis::D), s.alice.projector(Basis::A),
                                             s.alice.projector(Basis::R), s.alice.projector(Basis::L)};

  MaskScan scan;
  scan.data.tau = {d.coincidence_window, 0.0};
  if (d.delayed_duration > 0.0) {
    DetectorConfig cfg = base;
    cfg.exposure = d.delayed_duration;
    cfg.rng_seed = derive_seed(seed, 0);
    if (d.noiseless) {
      CountRecord rec{"delayed", 0.0, cfg.exposure,
                      static_cast<std::uint64_t>(std::llround(cfg.singles_rate_alice * cfg.exposure)),
                      static_cast<std::uint64_t>(std::llround(cfg.singles_rate_bob * cfg.exposure)),
                      static_cast<std::uint64_t>(std::llround(cfg.singles_rate_alice * cfg.singles_rate_bob *
                                                              cfg.coincidence_window * cfg.exposure))};
      scan.delayed = rec;
    } else {
      scan.delayed = simulate_delayed_counts(cfg);
    }
  }

  const std::size_t points = offsets.size();
  for (std::size_t m = 0; m < d.intervals; ++m) {
    for (Basis b : kAllBases) {
      const int k = static_cast<int>(b);
      DetectorConfig cfg = base;
      cfg.efficiency_bob *= s.alice.efficiency(b);
      for (std::size_t j = 0; j < points; ++j) {
        cfg.rng_seed = derive_seed(seed, 1 + (m * 4 + static_cast<std::size_t>(k)) * points + j);
        CountRecord rec;
        if (d.noiseless) {
          const auto rates = expected_rates(source, alice[k], masks[j], cfg);
          rec = {to_string(b), offsets[j], cfg.exposure,
                 static_cast<std::uint64_t>(std::llround(cfg.singles_rate_alice * cfg.exposure)),
                 static_cast<std::uint64_t>(std::llround(cfg.singles_rate_bob * cfg.exposure)),
                 static_cast<std::uint64_t>(
                     std::llround((rates.true_coincidences + rates.accidental_coincidences) * cfg.exposure))};
        } else {
          rec = simulate_counts(source, alice[k], masks[j], cfg);
          rec.setting = to_string(b);
        }
        scan.data.records.push_back(std::move(rec));
      }
    }
  }
  return scan;
}

MaskAnalysis analyze_mask_scan(const Scenario& s, const std::vector<CountRecord>& records) {
  MaskAnalysis out;
  FringeDataset data;
  std::optional<CountRecord> delayed;
  for (const auto& r : records) {
    if (r.setting == "delayed") {
      if (delayed) {
        delayed->duration += r.duration;
        delayed->singles_alice += r.singles_alice;
        delayed->singles_bob += r.singles_bob;
        delayed->coincidences += r.coincidences;
      } else {
        delayed = r;
      }
    } else {
      data.records.push_back(r);
    }
  }
  if (s.analysis.tau) {
    out.tau = *s.analysis.tau;
  } else if (delayed) {
    out.tau = estimate_coincidence_window(*delayed);
  } else {
    out.tau = {s.detector.coincidence_window, 0.0};
  }
  data.tau = out.tau;
  const double period = s.mask_period();
  out.fit = fit_fringes(data, period, s.analysis.subtract);
  out.method1 = witness_from_fit(out.fit);
  try {
    out.blocks = witness_blocks(data, period, s.analysis.blocks, s.analysis.clamp);
  } catch (const DomainError& e) {
    out.method2_skipped = e.what();
  }
  return out;
}

namespace {

RunOutput mask_report(const Scenario& s, const MaskAnalysis& an, std::vector<Artifact> artifacts) {
  RunOutput out;
  out.artifacts = std::move(artifacts);
  const auto& fit = an.fit;
  json bases = json::object();
  for (Basis b : kAllBases) {
    const auto& bf = fit[b];
    bases[to_string(b)] = {{"visibility", measured(bf.visibility)}, {"offset", bf.offset},
                           {"amplitude", bf.amplitude}, {"max_position", fit.max_position(b)},
                           {"min_position", fit.min_position(b)}};
  }
  json method1{{"subtracted", s.analysis.subtract}, {"period", fit.period}, {"x0", measured(fit.x0)},
               {"chi2", fit.chi2}, {"dof", fit.dof}, {"bases", bases},
               {"covariance_order", {"x0", "o_D", "a_D", "o_A", "a_A", "o_R", "a_R", "o_L", "a_L"}},
               {"covariance", fit.covariance}, {"witness", witness_json(an.method1)}};
  json result{{"l", s.source.l()}, {"tau", measured(an.tau)}, {"method1", method1}};
  if (an.blocks) {
    const auto& bw = *an.blocks;
    json blocks = json::array();
    json excluded = json::array();
    for (const auto& blk : bw.blocks) {
      json v = json::object();
      for (Basis b : kAllBases) v[to_string(b)] = blk.visibilities[static_cast<int>(b)];
      json bj{{"index", blk.index}, {"defined", blk.defined}, {"visibilities", v}};
      if (blk.defined) bj["w"] = blk.w;
      else {
        bj["note"] = blk.note;
        excluded.push_back(blk.index);
      }
      blocks.push_back(std::move(bj));
    }
    json extremal = json::object();
    for (Basis b : kAllBases) {
      extremal[to_string(b)] = {{"max_offset", bw.max_offsets[static_cast<int>(b)]},
                                {"min_offset", bw.min_offsets[static_cast<int>(b)]}};
    }
    result["method2"] = {{"clamp", s.analysis.clamp}, {"blocks", blocks}, {"excluded", excluded},
                         {"mean", bw.stats.mean}, {"sem", bw.stats.sem}, {"n", bw.stats.n},
                         {"significance", bw.stats.sem > 0.0 ? (bw.stats.mean - 1.0) / bw.stats.sem : 0.0},
                         {"intervals_per_block", bw.intervals_per_block},
                         {"dropped_intervals", bw.dropped_intervals}, {"extremal_offsets", extremal}};
  } else {
    result["method2"] = {{"skipped", an.method2_skipped}};
  }

  // Fitted curves over the scanned range for plotting.
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (double x : scan_offsets(s)) {
    lo = first ? x : std::min(lo, x);
    hi = first ? x : std::max(hi, x);
    first = false;
  }
  std::string curves = "basis,offset,model\n";
  constexpr int kCurvePoints = 200;
  for (Basis b : kAllBases) {
    for (int q = 0; q <= kCurvePoints; ++q) {
      const double x = lo + (hi - lo) * q / kCurvePoints;
      curves += std::string(to_string(b)) + ',' + io::format_double(x) + ',' + io::format_double(fit.model(b, x)) +
                '\n';
    }
  }
  out.artifacts.push_back({"fit_curves.csv", "csv", std::move(curves)});
  out.report = envelope(s, std::move(result));
  return out;
}

}  // namespace

RunOutput run_mask_entanglement(const Scenario& s) {
  const auto scan = simulate_mask_scan(s);
  std::vector<CountRecord> all;
  if (scan.delayed) all.push_back(*scan.delayed);
  all.insert(all.end(), scan.data.records.begin(), scan.data.records.end());
  const auto an = analyze_mask_scan(s, all);
  return mask_report(s, an, {{"counts.csv", "csv", io::records_to_csv(all)}});
}

RunOutput analyze(const Scenario& s, std::string_view records_csv) {
  if (s.kind != "mask-entanglement") throw ConfigError("analyze needs a mask-entanglement scenario");
  const auto records = io::records_from_csv(records_csv);
  return mask_report(s, analyze_mask_scan(s, records), {});
}

RunOutput run_scenario(const Scenario& s) {
  if (s.kind == "render-mode") return run_render_mode(s);
  if (s.kind == "rotation-calibration") return run_rotation_calibration(s);
  if (s.kind == "iccd-entanglement") return run_iccd_entanglement(s);
  if (s.kind == "mask-entanglement") return run_mask_entanglement(s);
  throw ConfigError("unknown scenario kind '" + s.kind + "'");
}

}  // namespace hoam
