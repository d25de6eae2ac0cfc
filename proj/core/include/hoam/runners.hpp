#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoam/analysis.hpp"
#include "hoam/detection.hpp"
#include "hoam/scenario.hpp"

namespace hoam {

/// Library version string embedded in every report.
const char* version();

struct Artifact {
  std::string name;    // file name relative to the output directory
  std::string format;  // csv, pgm or json
  std::string contents;
};

struct RunOutput {
  nlohmann::json report;
  std::vector<Artifact> artifacts;
};

/// Writes report.json plus every artifact whose format is in `formats`
/// (all when empty), each atomically.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir, const std::set<std::string>& formats = {});

// render-mode

struct RenderResult {
  std::int64_t l;
  bool ring_model;
  std::vector<double> profile;  // azimuthal intensity, theta = 2 pi k / n
  double ring_radius;           // m; 0 in the ring model
  std::size_t maxima;
  std::optional<double> on_axis_null;  // I(axis) / max I, full grid only
  std::optional<RealImage> image;
  std::optional<GridSpec> grid;
};

/// Throws SamplingError naming the required grid size when the full-grid
/// masks alias and the ring model is off.
RenderResult render_mode(const Scenario& s);
RunOutput run_render_mode(const Scenario& s);

// rotation-calibration

/// Rotation-fringe series, one per angular position around the ring.
std::vector<std::vector<RotationSample>> simulate_rotation_fringes(const Scenario& s);
RunOutput run_rotation_calibration(const Scenario& s);

// iccd-entanglement

struct IccdAnalysis {
  std::array<std::vector<double>, 4> folded;  // counts per fringe-phase bin
  std::vector<double> folded_background;
  std::array<Measured, 4> corrected;
  std::array<Measured, 4> uncorrected;
  WitnessResult witness_corrected;
  WitnessResult witness_uncorrected;
  std::array<std::size_t, 4> max_bin;
  std::array<std::size_t, 4> min_bin;
};

struct IccdRun {
  GridSpec grid;
  std::array<CountImage, 4> stacks;
  CountImage background;
  IccdAnalysis analysis;
};

IccdRun simulate_iccd(const Scenario& s);
RunOutput run_iccd_entanglement(const Scenario& s);

// mask-entanglement

struct MaskScan {
  FringeDataset data;
  std::optional<CountRecord> delayed;
};

struct MaskAnalysis {
  Measured tau;
  FringeFit fit;
  WitnessResult method1;
  std::optional<BlockWitnessResult> blocks;
  std::string method2_skipped;
};

MaskScan simulate_mask_scan(const Scenario& s);
/// Offsets of the scan points: scan_fringes periods from start_offset.
std::vector<double> scan_offsets(const Scenario& s);
/// tau from the analysis override, the delayed record, or the configured
/// window (sigma 0) in that order.
MaskAnalysis analyze_mask_scan(const Scenario& s, const std::vector<CountRecord>& records);
RunOutput run_mask_entanglement(const Scenario& s);

/// Analysis only, on a CountRecord CSV produced by mask-scan (or by hand).
RunOutput analyze(const Scenario& s, std::string_view records_csv);

/// Dispatches on s.kind.
RunOutput run_scenario(const Scenario& s);

}  // namespace hoam
