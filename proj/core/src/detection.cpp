#include "hoam/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "hoam/errors.hpp"

namespace hoam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

std::uint64_t poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

// Integral of 1 + V cos(2 l theta - d) over [a, b].
double ring_integral(const RingMode& m, double a, double b) {
  const double two_l = 2.0 * static_cast<double>(m.l);
  const double v = m.visibility();
  const double d = m.relative_phase();
  return (b - a) + v * (std::sin(two_l * b - d) - std::sin(two_l * a - d)) / two_l;
}

double transmission_closed_form(const RingMode& m, const SlitMask& mask) {
  const double l = static_cast<double>(m.l);
  double mean_cos = 0.0;
  for (int j = 0; j < mask.n_slits; ++j) {
    const double theta = mask.arc_offset + j * mask.angular_pitch;
    mean_cos += std::cos(2.0 * l * theta - m.relative_phase());
  }
  mean_cos /= mask.n_slits;
  const double open = mask.n_slits * mask.slit_width / kTwoPi;
  return open * (1.0 + m.visibility() * sinc(l * mask.slit_width) * mean_cos);
}

double transmission_linearized(const RingMode& m, const SlitMask& mask) {
  double sum = 0.0;
  for (int j = 0; j < mask.n_slits; ++j) {
    const auto [a, b] = mask.slit_interval(j);
    sum += ring_integral(m, a, b);
  }
  return sum / kTwoPi;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void SlitMask::validate() const {
  if (n_slits < 1) throw DomainError("slit mask needs at least one slit");
  if (!(angular_pitch > 0.0)) throw DomainError("slit pitch must be positive");
  if (!(slit_width > 0.0) || !(slit_width < angular_pitch)) throw DomainError("slit width must lie in (0, pitch)");
  if (n_slits * angular_pitch > kTwoPi * (1.0 + 1e-12)) throw DomainError("slits overrun the full circle");
  if (!std::isfinite(arc_offset)) throw DomainError("mask offset must be finite");
  if (mode == MaskMode::linearized) {
    if (!(linearization_radius > 0.0)) throw DomainError("linearized mask needs a positive radius");
    if (n_slits * angular_pitch >= kPi) throw DomainError("linearized mask must span less than half the ring");
  }
}

SlitMask SlitMask::fringe_matched(std::int64_t l, int n_slits, double width_over_pitch, double arc_offset) {
  SlitMask m;
  m.n_slits = n_slits;
  m.angular_pitch = fringe_period(l);
  m.slit_width = width_over_pitch * m.angular_pitch;
  m.arc_offset = arc_offset;
  m.validate();
  return m;
}

std::pair<double, double> SlitMask::slit_interval(int j) const {
  if (mode == MaskMode::angular) {
    const double c = arc_offset + j * angular_pitch;
    return {c - slit_width / 2.0, c + slit_width / 2.0};
  }
  // Lateral positions on the tangent line divided by the radius; the radius
  // itself drops out of the ring-model geometry.
  const double ref = 0.5 * (n_slits - 1) * angular_pitch;
  const double u = arc_offset + j * angular_pitch - ref;
  return {ref + std::atan(u - slit_width / 2.0), ref + std::atan(u + slit_width / 2.0)};
}

SlitMask SlitMask::shifted(double offset) const {
  SlitMask m = *this;
  m.arc_offset = offset;
  return m;
}

double mask_transmission(const RingMode& mode, const SlitMask& mask) {
  mode.validate();
  mask.validate();
  return mask.mode == MaskMode::angular ? transmission_closed_form(mode, mask) : transmission_linearized(mode, mask);
}

double mask_transmission(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask) {
  mask.validate();
  const auto modes = source.conditional_modes(alice);
  double p = 0.0;
  double t = 0.0;
  for (const auto& m : modes) {
    p += m.heralding_probability;
    t += m.heralding_probability * mask_transmission(m.mode, mask);
  }
  if (p < 1e-15) throw OrthogonalProjectionError("Alice's projector is orthogonal to the source");
  return t / p;
}

LinearizedMask linearize_mask(const SlitMask& mask, double max_arc_span) {
  SlitMask lin = mask;
  lin.mode = MaskMode::linearized;
  if (!(lin.linearization_radius > 0.0)) throw DomainError("linearization needs a positive radius");
  const double span = mask.n_slits * mask.angular_pitch;
  const double sagitta = lin.linearization_radius * (1.0 - std::cos(span / 2.0));
  if (span > max_arc_span) {
    std::ostringstream msg;
    msg << "mask arc span " << span << " rad exceeds " << max_arc_span << " rad (sagitta " << sagitta << " m)";
    throw ApproximationError(msg.str(), sagitta);
  }
  lin.validate();
  return {lin, sagitta};
}

void DetectorConfig::validate() const {
  if (!(pair_rate >= 0.0) || !(singles_rate_alice >= 0.0) || !(singles_rate_bob >= 0.0)) {
    throw DomainError("detector rates must be >= 0");
  }
  if (!(efficiency_bob >= 0.0 && efficiency_bob <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  if (!(coincidence_window > 0.0)) throw DomainError("coincidence window must be positive");
  if (!(exposure > 0.0)) throw DomainError("exposure must be positive");
}

void CountRecord::validate() const {
  if (!(duration > 0.0)) throw DomainError("count record duration must be positive");
}

ExpectedRates expected_rates(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask,
                             const DetectorConfig& cfg) {
  cfg.validate();
  mask.validate();
  double signal = 0.0;
  for (const auto& m : source.conditional_modes(alice)) {
    signal += m.heralding_probability * mask_transmission(m.mode, mask);
  }
  return {cfg.pair_rate * signal * cfg.efficiency_bob,
          cfg.singles_rate_alice * cfg.singles_rate_bob * cfg.coincidence_window};
}

CountRecord simulate_counts(const HybridState& state, const PolarizationProjector& alice, const SlitMask& mask,
                            const DetectorConfig& cfg) {
  return simulate_counts(PairSource(state), alice, mask, cfg);
}

CountRecord simulate_counts(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask,
                            const DetectorConfig& cfg) {
  const auto rates = expected_rates(source, alice, mask, cfg);
  std::mt19937_64 rng(cfg.rng_seed);
  CountRecord rec;
  rec.setting = alice.label();
  rec.mask_offset = mask.arc_offset;
  rec.duration = cfg.exposure;
  rec.singles_alice = poisson(rng, cfg.singles_rate_alice * cfg.exposure);
  rec.singles_bob = poisson(rng, cfg.singles_rate_bob * cfg.exposure);
  rec.coincidences = poisson(rng, (rates.true_coincidences + rates.accidental_coincidences) * cfg.exposure);
  return rec;
}

CountRecord simulate_delayed_counts(const DetectorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  CountRecord rec;
  rec.setting = "delayed";
  rec.duration = cfg.exposure;
  rec.singles_alice = poisson(rng, cfg.singles_rate_alice * cfg.exposure);
  rec.singles_bob = poisson(rng, cfg.singles_rate_bob * cfg.exposure);
  rec.coincidences = poisson(
      rng, cfg.singles_rate_alice * cfg.singles_rate_bob * cfg.coincidence_window * cfg.exposure);
  return rec;
}

void IccdConfig::validate() const {
  if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0)) throw DomainError("QE must lie in [0, 1]");
  if (!(pixel_pitch > 0.0) || !(max_trigger_rate > 0.0) || !(gate_window > 0.0) || !(exposure_per_frame > 0.0)) {
    throw DomainError("ICCD pitch, trigger rate, gate and exposure must be positive");
  }
  if (frames < 1) throw DomainError("ICCD stack needs at least one frame");
  if (!(accidental_rate_per_image >= 0.0) || !(trigger_rate >= 0.0)) throw DomainError("ICCD rates must be >= 0");
  if (!(bob_efficiency >= 0.0 && bob_efficiency <= 1.0)) throw DomainError("Bob efficiency must lie in [0, 1]");
}

std::uint64_t CountImage::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

IccdExpectation iccd_expectation(const PairSource& source, const PolarizationProjector& alice,
                                 const ComplexField& envelope, const IccdConfig& cfg) {
  cfg.validate();
  const auto& g = envelope.grid();
  if (std::abs(g.dx - cfg.pixel_pitch) > 1e-9 * cfg.pixel_pitch ||
      std::abs(g.dy - cfg.pixel_pitch) > 1e-9 * cfg.pixel_pitch) {
    throw DomainError("envelope grid pitch must equal the ICCD pixel pitch");
  }
  const auto [ax, ay] = cfg.axis;
  const auto amps = envelope.amplitudes();
  double peak = 0.0;
  for (const auto& a : amps) peak = std::max(peak, std::norm(a));

  const double l = static_cast<double>(source.l());
  double min_period_px = std::numeric_limits<double>::infinity();
  RealImage weight(g.nx, g.ny);
  double weight_sum = 0.0;
  const double herald = source.heralding_probability(alice);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double e = std::norm(envelope(i, j));
      if (e == 0.0) continue;
      const double dx = g.x(i) - ax;
      const double dy = g.y(j) - ay;
      if (e >= 1e-2 * peak) min_period_px = std::min(min_period_px, std::hypot(dx, dy) * kPi / (l * cfg.pixel_pitch));
      const double w = herald > 1e-15 ? e * source.conditional_ring_intensity(alice, std::atan2(dy, dx)) : 0.0;
      weight(i, j) = w;
      weight_sum += w;
    }
  }
  if (min_period_px < 2.0) {
    std::ostringstream msg;
    msg << "ring fringes are under-resolved: " << min_period_px << " pixels per period (need >= 2)";
    throw SamplingError(msg.str(), 2.0 / min_period_px);
  }

  const double triggers = std::min(cfg.trigger_rate * herald, cfg.max_trigger_rate) * cfg.exposure_per_frame;
  const double captured = std::min(1.0, envelope.power());
  const double signal_total =
      triggers * cfg.bob_efficiency * cfg.quantum_efficiency * captured * static_cast<double>(cfg.frames);

  IccdExpectation out{RealImage(g.nx, g.ny), cfg.accidental_rate_per_image * cfg.frames / static_cast<double>(g.size())};
  if (weight_sum > 0.0) {
    for (std::size_t k = 0; k < out.signal.values.size(); ++k) {
      out.signal.values[k] = signal_total * weight.values[k] / weight_sum;
    }
  }
  return out;
}

CountImage simulate_iccd_stack(const HybridState& state, const PolarizationProjector& alice,
                               const ComplexField& envelope, const IccdConfig& cfg) {
  return simulate_iccd_stack(PairSource(state), alice, envelope, cfg);
}

CountImage simulate_iccd_stack(const PairSource& source, const PolarizationProjector& alice,
                               const ComplexField& envelope, const IccdConfig& cfg) {
  const auto expect = iccd_expectation(source, alice, envelope, cfg);
  std::mt19937_64 rng(cfg.rng_seed);
  CountImage img{expect.signal.nx, expect.signal.ny, std::vector<std::uint64_t>(expect.signal.values.size())};
  for (std::size_t k = 0; k < img.counts.size(); ++k) {
    img.counts[k] = poisson(rng, expect.signal.values[k] + expect.background);
  }
  return img;
}

CountImage simulate_iccd_background(const ComplexField& envelope, const IccdConfig& cfg) {
  cfg.validate();
  const auto& g = envelope.grid();
  const double mean = cfg.accidental_rate_per_image * cfg.frames / static_cast<double>(g.size());
  std::mt19937_64 rng(cfg.rng_seed);
  CountImage img{g.nx, g.ny, std::vector<std::uint64_t>(g.size())};
  for (auto& c : img.counts) c = poisson(rng, mean);
  return img;
}

ComplexField annular_envelope(const GridSpec& grid, double radius, double width, std::pair<double, double> axis) {
  if (!(radius >= 0.0) || !(width > 0.0)) throw DomainError("annulus needs radius >= 0 and width > 0");
  ComplexField f(grid);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double r = std::hypot(grid.x(i) - axis.first, grid.y(j) - axis.second);
      const double u = (r - radius) / width;
      f(i, j) = std::exp(-u * u);
    }
  }
  const double p = f.power();
  if (!(p > 0.0)) throw DomainError("annulus does not intersect the grid");
  f *= Complex(1.0 / std::sqrt(p), 0.0);
  return f;
}

}  // namespace hoam
