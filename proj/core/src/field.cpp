#include "hoam/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "hoam/errors.hpp"

namespace hoam {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a;
}

// FFTW planning is not thread-safe; execution with new-array variants is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2-D DFT of a row-major ny x nx array. FFTW_ESTIMATE keeps the
// chosen algorithm (and therefore the floating-point result) reproducible.
void dft2(std::vector<Complex>& data, std::size_t nx, std::size_t ny, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

double angular_frequency(std::size_t index, std::size_t n, double pitch) {
  const auto m = index <= (n - 1) / 2 ? static_cast<double>(index)
                                      : static_cast<double>(index) - static_cast<double>(n);
  return 2.0 * kPi * m / (static_cast<double>(n) * pitch);
}

}  // namespace

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw DomainError("grid needs at least 2x2 samples");
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("grid pitch must be positive");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
}

bool GridSpec::contains(double px, double py) const {
  return px >= x(0) && px <= x(nx - 1) && py >= y(0) && py <= y(ny - 1);
}

ComplexField::ComplexField(GridSpec grid) : grid_(grid) {
  grid_.validate();
  data_.assign(grid_.size(), Complex{});
}

ComplexField::ComplexField(GridSpec grid, std::vector<Complex> amplitudes)
    : grid_(grid), data_(std::move(amplitudes)) {
  grid_.validate();
  if (data_.size() != grid_.size()) throw DomainError("amplitude count does not match grid");
}

double ComplexField::power() const {
  double sum = 0.0;
  for (const auto& a : data_) sum += std::norm(a);
  return sum * grid_.cell_area();
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  if (!(other.grid_ == grid_)) throw DomainError("cannot add fields on different grids");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  phase_step_ = std::max(phase_step_, other.phase_step_);
  return *this;
}

ComplexField& ComplexField::operator*=(Complex factor) {
  for (auto& a : data_) a *= factor;
  return *this;
}

ComplexField operator+(ComplexField lhs, const ComplexField& rhs) {
  lhs += rhs;
  return lhs;
}

ComplexField operator*(Complex factor, ComplexField field) {
  field *= factor;
  return field;
}

ComplexField gaussian_beam(const GridSpec& grid, double waist, std::pair<double, double> center) {
  grid.validate();
  if (!(waist > 0.0)) throw DomainError("waist must be positive");
  const double pitch = std::max(grid.dx, grid.dy);
  if (waist < 4.0 * pitch) {
    std::ostringstream msg;
    msg << "waist " << waist << " m is under-resolved; needs >= 4 samples (" << 4.0 * pitch << " m)";
    throw SamplingError(msg.str(), 4.0 * pitch / waist);
  }
  if (!grid.contains(center.first, center.second)) throw DomainError("beam center lies outside the grid");

  ComplexField field(grid);
  const double inv_w2 = 1.0 / (waist * waist);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const double dy = grid.y(j) - center.second;
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double dx = grid.x(i) - center.first;
      field(i, j) = std::exp(-(dx * dx + dy * dy) * inv_w2);
    }
  }
  const double p = field.power();
  field *= Complex(1.0 / std::sqrt(p), 0.0);
  return field;
}

namespace {

// Pairs touching a sample flagged in `filtered` are left out: those samples
// carry a pixel average rather than a point value.
double phase_step_excluding(const ComplexField& field, const PhaseMap& phase_map, const std::vector<char>& filtered) {
  constexpr std::size_t kRefine = 8;
  const auto& g = field.grid();
  const auto amps = field.amplitudes();

  struct Pair {
    double step;
    double weight;
  };
  std::vector<Pair> pairs;
  pairs.reserve(2 * g.size());
  std::vector<double> phase((std::max(g.nx, g.ny) - 1) * kRefine + 1);

  // Accumulates one line of samples (row or column) with refined phase values.
  auto scan_line = [&](std::size_t count, auto position, auto weight_of) {
    const std::size_t n_fine = (count - 1) * kRefine + 1;
    for (std::size_t f = 0; f < n_fine; ++f) {
      const auto [x, y] = position(static_cast<double>(f) / kRefine);
      phase[f] = phase_map(x, y);
    }
    for (std::size_t k = 0; k + 1 < count; ++k) {
      const std::size_t base = k * kRefine;
      double fine = 0.0;
      double coarse = 0.0;
      for (std::size_t s = 0; s < kRefine; ++s) fine += wrap_pi(phase[base + s + 1] - phase[base + s]);
      for (std::size_t s = 0; s < kRefine; s += 2) coarse += wrap_pi(phase[base + s + 2] - phase[base + s]);
      const bool resolved = std::abs(fine - coarse) <= 1e-6 * std::max(1.0, std::abs(fine));
      const double w = weight_of(k);
      if (w < 0.0) continue;
      pairs.push_back({resolved ? std::abs(fine) : std::numeric_limits<double>::infinity(), w});
    }
  };

  for (std::size_t j = 0; j < g.ny; ++j) {
    scan_line(
        g.nx, [&](double u) { return std::pair{g.x(0) + u * g.dx, g.y(j)}; },
        [&](std::size_t i) {
          const std::size_t a = j * g.nx + i, b = a + 1;
          if (!filtered.empty() && (filtered[a] || filtered[b])) return -1.0;
          return std::norm(amps[a]) + std::norm(amps[b]);
        });
  }
  for (std::size_t i = 0; i < g.nx; ++i) {
    scan_line(
        g.ny, [&](double u) { return std::pair{g.x(i), g.y(0) + u * g.dy}; },
        [&](std::size_t j) {
          const std::size_t a = j * g.nx + i, b = a + g.nx;
          if (!filtered.empty() && (filtered[a] || filtered[b])) return -1.0;
          return std::norm(amps[a]) + std::norm(amps[b]);
        });
  }

  double total = 0.0;
  for (const auto& p : pairs) total += p.weight;
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.step > b.step; });

  const double budget = kPhaseStepPowerTrim * total;
  double trimmed = 0.0;
  for (const auto& p : pairs) {
    if (trimmed + p.weight > budget) return p.step;
    trimmed += p.weight;
  }
  return 0.0;
}

}  // namespace

double max_phase_step(const ComplexField& field, const PhaseMap& phase_map) {
  return phase_step_excluding(field, phase_map, {});
}

ComplexField apply_phase(ComplexField field, const PhaseMap& phase_map) {
  const auto& g = field.grid();
  const double step = max_phase_step(field, phase_map);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      field(i, j) *= std::polar(1.0, phase_map(g.x(i), g.y(j)));
    }
  }
  field.set_phase_step(field.phase_step() + step);
  return field;
}

ComplexField apply_pixel_phase(ComplexField field, const PhaseMap& phase_map, std::size_t oversample) {
  if (oversample < 2) throw DomainError("oversample must be >= 2");
  constexpr std::size_t kProbe = 4;
  const auto& g = field.grid();

  // Mean of exp(i phase) over an n x n sub-grid of the pixel around (x, y).
  auto pixel_mean = [&](double x, double y, std::size_t n, double* spread) {
    Complex sum{};
    std::vector<double> ph(n * n);
    for (std::size_t b = 0; b < n; ++b) {
      const double sy = y + ((static_cast<double>(b) + 0.5) / static_cast<double>(n) - 0.5) * g.dy;
      for (std::size_t a = 0; a < n; ++a) {
        const double sx = x + ((static_cast<double>(a) + 0.5) / static_cast<double>(n) - 0.5) * g.dx;
        ph[b * n + a] = phase_map(sx, sy);
        sum += std::polar(1.0, ph[b * n + a]);
      }
    }
    if (spread) {
      double worst = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t a = 0; a < n; ++a) {
          if (a + 1 < n) worst = std::max(worst, std::abs(wrap_pi(ph[b * n + a + 1] - ph[b * n + a])));
          if (b + 1 < n) worst = std::max(worst, std::abs(wrap_pi(ph[(b + 1) * n + a] - ph[b * n + a])));
        }
      }
      *spread = worst * static_cast<double>(n);
    }
    return sum / static_cast<double>(n * n);
  };

  const std::vector<Complex> input(field.amplitudes().begin(), field.amplitudes().end());
  // Input amplitude, bilinear between samples and clamped at the grid edge.
  auto amplitude_at = [&](double fx, double fy) {
    fx = std::clamp(fx, 0.0, static_cast<double>(g.nx - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(g.ny - 1));
    const std::size_t i0 = std::min(static_cast<std::size_t>(fx), g.nx - 2);
    const std::size_t j0 = std::min(static_cast<std::size_t>(fy), g.ny - 2);
    const double u = fx - static_cast<double>(i0);
    const double v = fy - static_cast<double>(j0);
    const auto at = [&](std::size_t i, std::size_t j) { return input[j * g.nx + i]; };
    return (1 - u) * (1 - v) * at(i0, j0) + u * (1 - v) * at(i0 + 1, j0) + (1 - u) * v * at(i0, j0 + 1) +
           u * v * at(i0 + 1, j0 + 1);
  };
  // Pixel-area average of amplitude times exp(i phase) over an n x n sub-grid.
  auto pixel_integral = [&](std::size_t i, std::size_t j, std::size_t n) {
    Complex sum{};
    for (std::size_t b = 0; b < n; ++b) {
      const double fy = static_cast<double>(j) + (static_cast<double>(b) + 0.5) / static_cast<double>(n) - 0.5;
      for (std::size_t a = 0; a < n; ++a) {
        const double fx = static_cast<double>(i) + (static_cast<double>(a) + 0.5) / static_cast<double>(n) - 0.5;
        sum += amplitude_at(fx, fy) * std::polar(1.0, phase_map(g.x(0) + fx * g.dx, g.y(0) + fy * g.dy));
      }
    }
    return sum / static_cast<double>(n * n);
  };

  std::vector<char> filtered(g.size(), 0);
  std::vector<double> spreads(g.size(), 0.0);
  std::vector<Complex> probe(g.size());
  const auto amps = field.amplitudes();
  double total = 0.0;
  double lost = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = j * g.nx + i;
      double spread = 0.0;
      probe[k] = pixel_mean(g.x(i), g.y(j), kProbe, &spread);
      filtered[k] = spread > kPixelPhaseSpread;
      spreads[k] = spread;
      total += std::norm(amps[k]);
      if (filtered[k]) lost += (1.0 - std::norm(probe[k])) * std::norm(amps[k]);
    }
  }
  // Averaged pixels are band-limited by the box filter itself, as long as the
  // averaging only dims the neighbourhood of a singularity. When it wipes out
  // a large part of the beam the mask is simply unresolved: record the full
  // point-sampled step (propagate will refuse it) and skip the fine average.
  const bool resolved = !(lost > kPixelPhaseLossLimit * total);
  const double step = resolved ? phase_step_excluding(field, phase_map, filtered) : max_phase_step(field, phase_map);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = j * g.nx + i;
      const double x = g.x(i);
      const double y = g.y(j);
      if (!filtered[k]) {
        field(i, j) *= std::polar(1.0, phase_map(x, y));
      } else if (!resolved) {
        field(i, j) *= probe[k];
      } else {
        // Sub-steps of at most pi / 64, up to `oversample` per side.
        const auto n = static_cast<std::size_t>(std::ceil(spreads[k] / (kPi / 64.0)));
        field(i, j) = pixel_integral(i, j, std::clamp<std::size_t>(n, 2, oversample));
      }
    }
  }
  field.set_phase_step(field.phase_step() + step);
  return field;
}

ComplexField propagate(const ComplexField& field, double distance) {
  if (!(distance >= 0.0)) throw DomainError("propagation distance must be >= 0");
  if (field.phase_step() >= kPi) {
    const double ratio = field.phase_step() / kPi;
    std::ostringstream msg;
    msg << "applied phase mask aliases: largest inter-sample step is " << ratio
        << " x the Nyquist limit (pi); refine the grid by at least that factor";
    throw SamplingError(msg.str(), ratio);
  }
  const auto& g = field.grid();
  ComplexField out(g, std::vector<Complex>(field.amplitudes().begin(), field.amplitudes().end()));
  if (distance == 0.0) return out;

  std::vector<Complex> spectrum(field.amplitudes().begin(), field.amplitudes().end());
  dft2(spectrum, g.nx, g.ny, FFTW_FORWARD);

  const double k = 2.0 * kPi / g.wavelength;
  const double k2 = k * k;
  const double norm = 1.0 / static_cast<double>(g.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    const double ky = angular_frequency(j, g.ny, g.dy);
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double kx = angular_frequency(i, g.nx, g.dx);
      const double kz2 = k2 - kx * kx - ky * ky;
      auto& s = spectrum[j * g.nx + i];
      s = kz2 > 0.0 ? s * std::polar(norm, std::sqrt(kz2) * distance) : Complex{};
    }
  }
  dft2(spectrum, g.nx, g.ny, FFTW_BACKWARD);
  return ComplexField(g, std::move(spectrum));
}

RealImage intensity(const ComplexField& field) {
  const auto& g = field.grid();
  RealImage img(g.nx, g.ny);
  const auto amps = field.amplitudes();
  for (std::size_t k = 0; k < amps.size(); ++k) img.values[k] = std::norm(amps[k]);
  return img;
}

std::vector<double> azimuthal_profile(const RealImage& image, const GridSpec& grid, double radius,
                                      std::size_t n_samples, std::pair<double, double> center) {
  grid.validate();
  if (image.nx != grid.nx || image.ny != grid.ny) throw DomainError("image does not match grid");
  if (n_samples < 4) throw DomainError("azimuthal profile needs at least 4 samples");
  if (!(radius >= 0.0)) throw DomainError("radius must be >= 0");
  const auto [cx, cy] = center;
  if (!grid.contains(cx - radius, cy - radius) || !grid.contains(cx + radius, cy + radius)) {
    throw DomainError("sampling circle leaves the grid");
  }

  std::vector<double> profile(n_samples);
  const double x0 = grid.x(0);
  const double y0 = grid.y(0);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_samples);
    const double fx = (cx + radius * std::cos(theta) - x0) / grid.dx;
    const double fy = (cy + radius * std::sin(theta) - y0) / grid.dy;
    const auto i0 = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(fx))), grid.nx - 2);
    const auto j0 = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(fy))), grid.ny - 2);
    const double tx = fx - static_cast<double>(i0);
    const double ty = fy - static_cast<double>(j0);
    profile[k] = (1 - tx) * (1 - ty) * image(i0, j0) + tx * (1 - ty) * image(i0 + 1, j0) +
                 (1 - tx) * ty * image(i0, j0 + 1) + tx * ty * image(i0 + 1, j0 + 1);
  }
  return profile;
}

double peak_ring_radius(const RealImage& image, const GridSpec& grid, std::pair<double, double> center) {
  const double dr = std::min(grid.dx, grid.dy);
  const auto [cx, cy] = center;
  const double r_max = std::min({cx - grid.x(0), grid.x(grid.nx - 1) - cx, cy - grid.y(0), grid.y(grid.ny - 1) - cy}) - dr;
  if (!(r_max > dr)) throw DomainError("center too close to the grid edge");
  const auto n_bins = static_cast<std::size_t>(r_max / dr) + 1;
  std::vector<double> sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double r = std::hypot(grid.x(i) - cx, grid.y(j) - cy);
      const auto bin = static_cast<std::size_t>(std::lround(r / dr));
      if (bin >= n_bins) continue;
      sum[bin] += image(i, j);
      ++count[bin];
    }
  }
  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double mean = sum[b] / static_cast<double>(count[b]);
    if (mean > best_mean) {
      best_mean = mean;
      best = b;
    }
  }
  return static_cast<double>(best) * dr;
}

double second_moment_radius(const RealImage& image, const GridSpec& grid) {
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double v = image(i, j);
      s += v;
      sx += v * grid.x(i);
      sy += v * grid.y(j);
    }
  }
  if (!(s > 0.0)) throw DomainError("second moment of an empty image");
  const double mx = sx / s;
  const double my = sy / s;
  double r2 = 0.0;
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double ddx = grid.x(i) - mx;
      const double ddy = grid.y(j) - my;
      r2 += image(i, j) * (ddx * ddx + ddy * ddy);
    }
  }
  return std::sqrt(2.0 * r2 / s);
}

}  // namespace hoam
