#include "hoam/spm.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "hoam/errors.hpp"

namespace hoam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

// Angle within the current segment, [0, 2 pi / n).
double segment_local_angle(const SpmProfile& p, double phi) {
  const double width = kTwoPi / p.segments();
  const double local = std::fmod(wrap_2pi(phi - p.rotation()), width);
  return local < width ? local : 0.0;
}

// Phase ramp value inside a segment; mirrored for negative charge so that the
// machined depth stays non-negative.
double segment_phase(const SpmProfile& p, double local) {
  const auto l = static_cast<double>(p.charge());
  if (l >= 0.0) return l * local;
  return -l * (kTwoPi / p.segments() - local);
}

}  // namespace

SpmProfile::SpmProfile(std::int64_t charge, int segments, double wavelength, double uncut_radius, double rotation,
                       std::pair<double, double> center)
    : charge_(charge),
      segments_(segments),
      wavelength_(wavelength),
      uncut_radius_(uncut_radius),
      rotation_(rotation),
      center_(center) {
  if (segments_ < 1) throw DomainError("a spiral phase mirror needs at least one segment");
  if (!(wavelength_ > 0.0)) throw DomainError("wavelength must be positive");
  if (!(uncut_radius_ >= 0.0)) throw DomainError("uncut radius must be >= 0");
  const auto rem = std::llabs(charge_) % segments_;
  seam_phase_ = rem == 0 ? 0.0 : kTwoPi * static_cast<double>(rem) / segments_;
}

double SpmProfile::segment_phase_span() const {
  return kTwoPi * static_cast<double>(std::llabs(charge_)) / segments_;
}

double SpmProfile::max_depth() const {
  return static_cast<double>(std::llabs(charge_)) * wavelength_ / (2.0 * segments_);
}

double surface_depth(const SpmProfile& profile, double phi, double r) {
  if (r < profile.uncut_radius()) return 0.0;
  const double local = segment_local_angle(profile, phi);
  return segment_phase(profile, local) * profile.wavelength() / (4.0 * std::numbers::pi);
}

double reflection_phase(const SpmProfile& profile, double x, double y) {
  const double dx = x - profile.center().first;
  const double dy = y - profile.center().second;
  if (std::hypot(dx, dy) < profile.uncut_radius()) return 0.0;
  // Same as 4 pi depth / wavelength, evaluated without the round trip through metres.
  return segment_phase(profile, segment_local_angle(profile, std::atan2(dy, dx)));
}

RealImage export_heightmap(const SpmProfile& profile, const GridSpec& grid) {
  grid.validate();
  RealImage map(grid.nx, grid.ny);
  const auto [cx, cy] = profile.center();
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double dx = grid.x(i) - cx;
      const double dy = grid.y(j) - cy;
      map(i, j) = surface_depth(profile, std::atan2(dy, dx), std::hypot(dx, dy));
    }
  }
  return map;
}

SpmProfile rotated(const SpmProfile& profile, double delta) {
  return SpmProfile(profile.charge(), profile.segments(), profile.wavelength(), profile.uncut_radius(),
                    profile.rotation() + delta, profile.center());
}

PhaseMap phase_map(const SpmProfile& profile) {
  return [profile](double x, double y) { return reflection_phase(profile, x, y); };
}

}  // namespace hoam
