#pragma once

#include <cstdint>
#include <utility>

#include "hoam/field.hpp"

namespace hoam {

/// Segmented spiral phase mirror.
///
/// The surface is split into `segments` equal angular sectors; each carries a
/// depth ramp imprinting 2 pi charge / segments of phase on reflection. The
/// reflection phase is 4 pi depth / wavelength (double pass of the depth), so
/// a full turn accumulates 2 pi charge. A central disk of `uncut_radius` is
/// left flat. For negative charges the ramp is mirrored, keeping depths >= 0.
///
/// When charge / segments is not an integer every segment boundary carries a
/// phase seam of 2 pi frac(charge / segments); such profiles are allowed but
/// report has_seam_defects().
class SpmProfile {
 public:
  SpmProfile(std::int64_t charge, int segments, double wavelength, double uncut_radius = 0.0,
             double rotation = 0.0, std::pair<double, double> center = {0.0, 0.0});

  std::int64_t charge() const noexcept { return charge_; }
  int segments() const noexcept { return segments_; }
  double wavelength() const noexcept { return wavelength_; }
  double uncut_radius() const noexcept { return uncut_radius_; }
  double rotation() const noexcept { return rotation_; }
  std::pair<double, double> center() const noexcept { return center_; }

  bool has_seam_defects() const noexcept { return seam_phase_ != 0.0; }
  /// Phase discontinuity at each segment boundary, in [0, 2 pi).
  double seam_phase() const noexcept { return seam_phase_; }

  /// Phase ramp carried by one segment: 2 pi |charge| / segments.
  double segment_phase_span() const;
  /// Deepest point of a segment: |charge| wavelength / (2 segments).
  double max_depth() const;

  friend bool operator==(const SpmProfile&, const SpmProfile&) = default;

 private:
  std::int64_t charge_;
  int segments_;
  double wavelength_;
  double uncut_radius_;
  double rotation_;
  std::pair<double, double> center_;
  double seam_phase_;
};

/// Machined depth (m) at polar position (phi, r) about the mirror center.
double surface_depth(const SpmProfile& profile, double phi, double r);

/// Reflection phase (radians, unwrapped within a segment) at (x, y).
double reflection_phase(const SpmProfile& profile, double x, double y);

/// surface_depth sampled on the grid (m).
RealImage export_heightmap(const SpmProfile& profile, const GridSpec& grid);

/// Same mirror turned by `delta` radians in its mount.
SpmProfile rotated(const SpmProfile& profile, double delta);

/// reflection_phase bound to the profile, usable with apply_phase().
PhaseMap phase_map(const SpmProfile& profile);

}  // namespace hoam
