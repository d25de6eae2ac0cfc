#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hoam/field.hpp"
#include "hoam/hybrid_state.hpp"

namespace hoam {

enum class MaskMode { angular, linearized };

/// Array of n_slits angular slits centred at arc_offset + j angular_pitch.
///
/// In linearized mode the slits sit at equal spacing (radius * pitch) on the
/// line tangent to the ring at the mask's reference angle (n_slits - 1) pitch / 2,
/// and arc_offset acts as a lateral translation of radius * arc_offset.
struct SlitMask {
  int n_slits = 1;
  double angular_pitch = 0.0;  // rad, centre to centre
  double slit_width = 0.0;     // rad
  double arc_offset = 0.0;     // rad
  MaskMode mode = MaskMode::angular;
  double linearization_radius = 0.0;  // m

  /// Throws DomainError for inconsistent geometry.
  void validate() const;

  /// Mask whose pitch equals the fringe period pi / l with the given
  /// width-to-pitch ratio.
  static SlitMask fringe_matched(std::int64_t l, int n_slits, double width_over_pitch, double arc_offset = 0.0);

  /// Angular interval [begin, end] covered by slit j (mode aware).
  std::pair<double, double> slit_interval(int j) const;

  SlitMask shifted(double offset) const;
};

/// Fraction of the ring power transmitted by `mask`. Closed form:
/// (n w / 2 pi)(1 + V sinc(l w) mean_j cos(2 l theta_j - vartheta)) in angular mode;
/// in linearized mode the exact integral over the mapped slit intervals.
double mask_transmission(const RingMode& mode, const SlitMask& mask);

/// Transmission of a mixture conditioned on `alice`.
double mask_transmission(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask);

/// sin(x)/x with the removable singularity filled.
double sinc(double x);

struct LinearizedMask {
  SlitMask mask;
  double sagitta;  // m, worst-case departure of the line from the ring
};

/// Switches `mask` to linearized mode. Throws ApproximationError when its arc
/// span n_slits * angular_pitch exceeds `max_arc_span`.
LinearizedMask linearize_mask(const SlitMask& mask, double max_arc_span);

struct DetectorConfig {
  double pair_rate = 0.0;           // Hz
  double singles_rate_alice = 0.0;  // Hz
  double singles_rate_bob = 0.0;    // Hz
  double efficiency_bob = 1.0;      // all losses between source and Bob's detector
  double coincidence_window = 0.0;  // s
  double exposure = 1.0;            // s
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct CountRecord {
  std::string setting;
  double mask_offset = 0.0;  // rad
  double duration = 0.0;     // s
  std::uint64_t singles_alice = 0;
  std::uint64_t singles_bob = 0;
  std::uint64_t coincidences = 0;

  void validate() const;
  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

struct ExpectedRates {
  double true_coincidences;       // Hz
  double accidental_coincidences; // Hz
};

ExpectedRates expected_rates(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask,
                             const DetectorConfig& cfg);

/// Poisson counts for one setting. Deterministic in cfg.rng_seed.
CountRecord simulate_counts(const HybridState& state, const PolarizationProjector& alice, const SlitMask& mask,
                            const DetectorConfig& cfg);
CountRecord simulate_counts(const PairSource& source, const PolarizationProjector& alice, const SlitMask& mask,
                            const DetectorConfig& cfg);

/// Delayed-signal run: only accidental coincidences survive.
CountRecord simulate_delayed_counts(const DetectorConfig& cfg);

struct IccdConfig {
  double quantum_efficiency = 0.2;
  double pixel_pitch = 13e-6;          // m
  double max_trigger_rate = 500e3;     // Hz
  double gate_window = 5e-9;           // s
  double accidental_rate_per_image = 0.0;  // expected background counts per frame
  int frames = 1;
  double exposure_per_frame = 1.0;     // s
  double trigger_rate = 0.0;           // Alice detections/s for a projector that always fires
  double bob_efficiency = 1.0;         // Bob losses before the intensifier
  std::pair<double, double> axis = {0.0, 0.0};  // vortex axis in detector coordinates (m)
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct CountImage {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  std::uint64_t operator()(std::size_t i, std::size_t j) const { return counts[j * nx + i]; }
};

struct IccdExpectation {
  RealImage signal;      // expected signal counts per pixel, summed over frames
  double background;     // expected background counts per pixel, summed over frames
};

/// Expected counts per pixel of a triggered stack. `envelope` carries the
/// transverse amplitude of Bob's beam sampled on the detector pixels (its grid
/// pitch must equal the pixel pitch); the azimuthal structure is the exact
/// conditional ring pattern about cfg.axis. Throws SamplingError when the
/// fringes are not resolved by at least two pixels per period where the
/// envelope carries light.
IccdExpectation iccd_expectation(const PairSource& source, const PolarizationProjector& alice,
                                 const ComplexField& envelope, const IccdConfig& cfg);

/// Poisson-sampled stack. Deterministic in cfg.rng_seed.
CountImage simulate_iccd_stack(const HybridState& state, const PolarizationProjector& alice,
                               const ComplexField& envelope, const IccdConfig& cfg);
CountImage simulate_iccd_stack(const PairSource& source, const PolarizationProjector& alice,
                               const ComplexField& envelope, const IccdConfig& cfg);

/// Stack recorded with the trigger delayed: background only.
CountImage simulate_iccd_background(const ComplexField& envelope, const IccdConfig& cfg);

/// Annular amplitude envelope exp(-((r - radius)/width)^2) about `axis`, unit power.
ComplexField annular_envelope(const GridSpec& grid, double radius, double width, std::pair<double, double> axis);

/// Independent seed for substream `index` of `seed` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace hoam
