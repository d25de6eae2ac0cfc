#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace hoam {

using Complex = std::complex<double>;

/// Sampling grid of a transverse plane. Sample (i, j) sits at
/// ((i - nx/2) dx, (j - ny/2) dy); i runs along x, j along y.
struct GridSpec {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;         // m
  double dy = 0.0;         // m
  double wavelength = 0.0; // m

  /// Throws DomainError unless nx, ny >= 2 and dx, dy, wavelength > 0.
  void validate() const;

  double x(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(nx / 2)) * dx; }
  double y(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(ny / 2)) * dy; }
  std::size_t size() const { return nx * ny; }
  double cell_area() const { return dx * dy; }

  /// True if (x, y) lies within the sampled extent.
  bool contains(double x, double y) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Row-major real 2-D array on a grid: value(i, j) = values[j * nx + i].
struct RealImage {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;

  RealImage() = default;
  RealImage(std::size_t nx_, std::size_t ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), values(nx_ * ny_, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[j * nx + i]; }
  double operator()(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
};

/// Sampled complex scalar field.
///
/// Besides the amplitudes the field remembers the largest inter-sample phase
/// step of the masks applied to it since the last propagation; propagate()
/// refuses to run when that step reaches pi.
class ComplexField {
 public:
  explicit ComplexField(GridSpec grid);
  ComplexField(GridSpec grid, std::vector<Complex> amplitudes);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const Complex> amplitudes() const noexcept { return data_; }
  std::span<Complex> amplitudes() noexcept { return data_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[j * grid_.nx + i]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[j * grid_.nx + i]; }

  /// Sum of |a|^2 dx dy.
  double power() const;

  /// Largest adjacent-sample phase step (radians) of the masks applied so far.
  double phase_step() const noexcept { return phase_step_; }
  void set_phase_step(double step) noexcept { phase_step_ = step; }

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator*=(Complex factor);

 private:
  GridSpec grid_;
  std::vector<Complex> data_;
  double phase_step_ = 0.0;
};

ComplexField operator+(ComplexField lhs, const ComplexField& rhs);
ComplexField operator*(Complex factor, ComplexField field);

using PhaseMap = std::function<double(double x, double y)>;

/// Power-normalised Gaussian with amplitude exp(-r^2 / waist^2) about `center`.
/// Throws SamplingError when waist < 4 max(dx, dy), DomainError when the
/// center lies outside the grid.
ComplexField gaussian_beam(const GridSpec& grid, double waist, std::pair<double, double> center = {0.0, 0.0});

/// Multiplies every sample by exp(i phase_map(x, y)) and records the mask's
/// band-limit step (see max_phase_step()).
ComplexField apply_phase(ComplexField field, const PhaseMap& phase_map);

/// apply_phase for a mask of finite pixels: samples across which the phase
/// varies by more than kPixelPhaseSpread become the pixel-area average of the
/// (bilinearly interpolated) input amplitude times exp(i phase), with up to
/// oversample^2 sub-samples. Keeps the lattice from summing coherently around
/// a phase singularity; power drops slightly there. Averaged samples do not
/// count towards the recorded band-limit step unless the averaging removes
/// more than kPixelPhaseLossLimit of the power; then the mask counts as
/// unresolved and the full point-sampled step is recorded.
ComplexField apply_pixel_phase(ComplexField field, const PhaseMap& phase_map, std::size_t oversample = 32);

/// Largest phase step of `phase_map` between adjacent samples, measured along
/// an 8x refined path so that ramps of up to 4 pi per sample are resolved.
/// Pairs whose step cannot be resolved count as infinite. The highest-step
/// pairs that together carry at most `kPhaseStepPowerTrim` of the field power
/// (phase singularities) are excluded.
double max_phase_step(const ComplexField& field, const PhaseMap& phase_map);

inline constexpr double kPhaseStepPowerTrim = 1e-2;
inline constexpr double kPixelPhaseLossLimit = 0.25;
inline constexpr double kPixelPhaseSpread = std::numbers::pi / 32.0;

/// Angular-spectrum propagation over `distance` metres; evanescent components
/// are discarded. Throws SamplingError if the applied masks alias.
ComplexField propagate(const ComplexField& field, double distance);

/// |a|^2 per sample.
RealImage intensity(const ComplexField& field);

/// Bilinear samples of `image` on a circle of `radius` about `center` at
/// n_samples equally spaced angles starting at theta = 0 (counter-clockwise).
/// Fewer than four samples per fringe alias; that is the caller's concern.
std::vector<double> azimuthal_profile(const RealImage& image, const GridSpec& grid, double radius,
                                      std::size_t n_samples, std::pair<double, double> center = {0.0, 0.0});

/// Radius (m) of the maximum of the azimuthally averaged intensity.
double peak_ring_radius(const RealImage& image, const GridSpec& grid, std::pair<double, double> center = {0.0, 0.0});

/// Second-moment (D4sigma / 2) radius of an intensity image about its centroid.
double second_moment_radius(const RealImage& image, const GridSpec& grid);

}  // namespace hoam
