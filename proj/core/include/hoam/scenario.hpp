#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hoam/analysis.hpp"
#include "hoam/detection.hpp"
#include "hoam/hybrid_state.hpp"

namespace hoam {

/// Photon-pair (or laser) source feeding the transfer setup.
///
/// type "hybrid": the input polarisation is transferred with l1 + l2 quanta;
/// `coherence` < 1 mixes in the decohered state. type "separable": one of the
/// classically correlated controls "product" (H only), "decohered" (H,+l / V,-l
/// mixture) or "da-correlated" (D with the D-mode, A with the A-mode).
struct SourceSpec {
  std::string type = "hybrid";
  std::string separable;
  std::string polarization = "D";
  std::int64_t l1 = 0;
  std::int64_t l2 = 0;
  double coherence = 1.0;
  double wavelength = 810e-9;

  std::int64_t l() const { return l1 + l2; }
  HybridState state() const;
  PairSource pair_source() const;
};

/// Alice's polarisation analyser. Waveplate offsets model misalignment; the
/// per-basis efficiency scales the heralded rate seen by Bob.
struct AliceSpec {
  double hwp_error_deg = 0.0;
  double qwp_error_deg = 0.0;
  std::map<std::string, double> basis_efficiency;

  PolarizationProjector projector(Basis b) const;
  double efficiency(Basis b) const;
};

struct RenderSpec {
  std::size_t grid = 1024;
  double dx = 20e-6;
  double waist = 3e-3;
  double distance = 5.0;
  double focal_length = 0.0;  // thin lens before propagation; 0 for none
  int segments = 1;
  double uncut_radius = 0.0;
  double rotation = 0.0;
  std::size_t ring_samples = 0;  // 0: 16 l, at least 1024
  double prominence = 0.2;
};

struct RotationSpec {
  std::size_t positions = 12;
  double fringes = 5.0;
  std::size_t samples_per_fringe = 16;
  double visibility = 0.9;
  double counts = 0.0;              // mean counts per sample; 0 for noiseless data
  double squeeze_amplitude = 0.0;   // relative fringe-density modulation around the ring
  double squeeze_phase_deg = 0.0;
  double scale_bias = 0.0;          // common relative fringe-density error
  double stage_offset_deg = 0.0;    // absolute stage error, one draw per position
  double jitter_deg = 0.0;          // relative error per sample
};

struct IccdSpec {
  IccdConfig config;
  std::size_t nx = 128;
  std::size_t ny = 128;
  double ring_radius = 10e-3;
  double ring_width = 1e-3;
  std::size_t phase_bins = 16;
};

struct MaskSpec {
  int n_slits = 60;
  double width_over_pitch = 1.0 / 7.0;
  std::optional<double> angular_pitch;  // defaults to the fringe period pi / l
  std::string mode = "angular";
  double radius = 0.0;
  double max_arc_span = 0.5;
  double scan_fringes = 1.8;
  std::size_t points = 16;
  double start_offset = 0.0;
};

struct DetectorSpec {
  double pair_rate = 0.0;
  double singles_alice = 0.0;
  double singles_bob = 0.0;
  double efficiency_bob = 1.0;
  double coincidence_window = 4.68e-9;
  double interval = 1.0;        // s per recorded interval
  std::size_t intervals = 1;    // repeated intervals per scan point
  double delayed_duration = 0.0;  // s; 0 uses the exact window in the analysis
  bool noiseless = false;
};

struct AnalysisSpec {
  bool subtract = true;
  std::size_t blocks = 10;
  bool clamp = true;
  std::optional<Measured> tau;  // overrides the delayed-run estimate
};

struct Scenario {
  std::string kind;
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  bool ring_model = false;
  SourceSpec source;
  AliceSpec alice;
  RenderSpec render;
  RotationSpec rotation;
  IccdSpec iccd;
  MaskSpec mask;
  DetectorSpec detector;
  AnalysisSpec analysis;

  /// Fringe period of the mask scan in radians of arc offset.
  double mask_period() const;
  SlitMask slit_mask(double offset) const;
  bool stochastic() const;
};

/// Parses and validates a scenario. Throws ConfigError with the offending key.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Fully resolved scenario (defaults filled in), limited to the sections the
/// kind uses.
nlohmann::json to_json(const Scenario& s);

}  // namespace hoam
