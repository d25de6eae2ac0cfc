#pragma once

// Reference implementations used by the tests. Nothing here calls into the
// library's closed forms; each oracle recomputes its quantity from the
// definition (brute-force sums, quadrature, direct complex arithmetic).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

using C = std::complex<double>;

// |c+ e^{il t} + c- e^{-il t}|^2 straight from the superposition.
inline double ring(C cp, C cm, double l, double t) {
  return std::norm(cp * std::polar(1.0, l * t) + cm * std::polar(1.0, -l * t));
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (z * p1 - p0) / (z * z - 1.0);
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

// Composite Gauss-Legendre on [a, b] with panels no wider than `panel`.
template <class F>
double integrate(F f, double a, double b, double panel) {
  static const GaussLegendre gl(16);
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int p = 0; p < n; ++p) {
    const double lo = a + p * h;
    for (std::size_t k = 0; k < gl.x.size(); ++k) sum += gl.w[k] * f(lo + 0.5 * h * (gl.x[k] + 1.0));
  }
  return sum * 0.5 * h;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1).
inline double sample_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Count of strict circular local maxima of a sequence.
inline std::size_t circular_peaks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::size_t c = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (v[k] > v[(k + n - 1) % n] && v[k] >= v[(k + 1) % n]) ++c;
  }
  return c;
}

// Linear least squares of y on {1, cos(m t), sin(m t)}: returns (mean, amplitude).
inline std::pair<double, double> harmonic(const std::vector<double>& y, double m) {
  const std::size_t n = y.size();
  double a0 = 0, ac = 0, as = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    a0 += y[k];
    ac += y[k] * std::cos(m * t);
    as += y[k] * std::sin(m * t);
  }
  a0 /= static_cast<double>(n);
  ac *= 2.0 / static_cast<double>(n);
  as *= 2.0 / static_cast<double>(n);
  return {a0, std::hypot(ac, as)};
}

// Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
