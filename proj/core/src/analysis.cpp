#include "hoam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "hoam/errors.hpp"
#include "lm.hpp"

namespace hoam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kStarts = 8;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

int index_of(Basis b) { return static_cast<int>(b); }

double wrap_unit(double t) {
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

CountRecord sum_records(const std::vector<CountRecord>& parts, std::size_t begin, std::size_t end) {
  CountRecord total;
  if (begin < end) {
    total.setting = parts[begin].setting;
    total.mask_offset = parts[begin].mask_offset;
  }
  for (std::size_t k = begin; k < end; ++k) {
    total.duration += parts[k].duration;
    total.singles_alice += parts[k].singles_alice;
    total.singles_bob += parts[k].singles_bob;
    total.coincidences += parts[k].coincidences;
  }
  return total;
}

// Method-2 visibility: limited to [0, 1]; NaN when the corrected sum is not positive.
double bounded_visibility(double max, double min) {
  const double s = max + min;
  if (!(s > 0.0)) return kNaN;
  return std::clamp((max - min) / s, 0.0, 1.0);
}

struct BasisLs {
  double o;
  double a;
  double chi2;
};

// Weighted least squares of y on {1, sin^2} with o, a >= 0. The problem is
// two-dimensional, so the bounded optimum is the best feasible candidate among
// the interior solution and the three faces.
BasisLs bounded_ls(const std::vector<FringeSample>& pts, double x0n, double shift, double period) {
  double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0, yy = 0;
  for (const auto& p : pts) {
    const double w = 1.0 / (p.sigma * p.sigma);
    const double s = std::pow(std::sin(kPi * (p.x / period - x0n - shift)), 2);
    s00 += w;
    s01 += w * s;
    s11 += w * s * s;
    b0 += w * p.y;
    b1 += w * p.y * s;
    yy += w * p.y * p.y;
  }
  const auto chi2 = [&](double o, double a) {
    return yy - 2.0 * (o * b0 + a * b1) + o * o * s00 + 2.0 * o * a * s01 + a * a * s11;
  };
  BasisLs best{0.0, 0.0, chi2(0.0, 0.0)};
  const auto consider = [&](double o, double a) {
    if (!(o >= 0.0) || !(a >= 0.0)) return;
    const double c = chi2(o, a);
    if (c < best.chi2) best = {o, a, c};
  };
  const double det = s00 * s11 - s01 * s01;
  if (det > 1e-12 * s00 * s11) consider((s11 * b0 - s01 * b1) / det, (s00 * b1 - s01 * b0) / det);
  consider(b0 / s00, 0.0);
  if (s11 > 0.0) consider(0.0, b1 / s11);
  best.chi2 = std::max(best.chi2, 0.0);
  return best;
}

}  // namespace

const char* to_string(Basis b) {
  switch (b) {
    case Basis::D: return "D";
    case Basis::A: return "A";
    case Basis::R: return "R";
    case Basis::L: return "L";
  }
  return "?";
}

Basis basis_from_label(const std::string& label) {
  if (label == "D") return Basis::D;
  if (label == "A") return Basis::A;
  if (label == "R") return Basis::R;
  if (label == "L") return Basis::L;
  throw DomainError("unknown basis label '" + label + "'");
}

PolarizationProjector projector(Basis b) { return PolarizationProjector::from_label(to_string(b)); }

double basis_shift_fraction(Basis b) {
  switch (b) {
    case Basis::D: return 0.0;
    case Basis::A: return 0.5;
    case Basis::R: return 0.75;
    case Basis::L: return 0.25;
  }
  return 0.0;
}

Measured estimate_coincidence_window(double acc, double s1, double s2, double duration) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw DomainError("coincidence window needs non-zero singles");
  if (!(duration > 0.0)) throw DomainError("coincidence window needs a positive duration");
  if (!(acc >= 0.0)) throw DomainError("accidental counts must be >= 0");
  const double unit = duration / (s1 * s2);
  if (acc == 0.0) return {0.0, unit};
  const double tau = acc * unit;
  return {tau, tau * std::sqrt(1.0 / acc + 1.0 / s1 + 1.0 / s2)};
}

Measured estimate_coincidence_window(const CountRecord& delayed) {
  delayed.validate();
  return estimate_coincidence_window(static_cast<double>(delayed.coincidences),
                                     static_cast<double>(delayed.singles_alice),
                                     static_cast<double>(delayed.singles_bob), delayed.duration);
}

Measured expected_accidentals(const CountRecord& record, const Measured& tau) {
  record.validate();
  const double s1 = static_cast<double>(record.singles_alice);
  const double s2 = static_cast<double>(record.singles_bob);
  const double acc = s1 * s2 * tau.value / record.duration;
  const double rel2 = 1.0 / std::max(s1, 1.0) + 1.0 / std::max(s2, 1.0);
  const double from_tau = s1 * s2 * tau.sigma / record.duration;
  return {acc, std::sqrt(acc * acc * rel2 + from_tau * from_tau)};
}

Measured subtract_accidentals(const Measured& counts, const Measured& accidentals, bool clamp) {
  double v = counts.value - accidentals.value;
  if (clamp && v < 0.0) v = 0.0;
  return {v, std::hypot(counts.sigma, accidentals.sigma)};
}

Measured subtract_accidentals(const CountRecord& record, const Measured& tau, bool clamp) {
  const double c = static_cast<double>(record.coincidences);
  return subtract_accidentals(Measured{c, std::sqrt(std::max(c, 1.0))}, expected_accidentals(record, tau), clamp);
}

std::vector<FringePoint> group_points(const FringeDataset& data, Basis b) {
  const std::string label = to_string(b);
  std::map<double, std::vector<CountRecord>> by_offset;
  for (const auto& r : data.records) {
    if (r.setting == label) by_offset[r.mask_offset].push_back(r);
  }
  std::vector<FringePoint> out;
  for (auto& [offset, parts] : by_offset) {
    out.push_back({offset, sum_records(parts, 0, parts.size()), std::move(parts)});
  }
  return out;
}

FringeSamples fringe_samples(const FringeDataset& data, bool subtract) {
  FringeSamples samples;
  for (Basis b : kAllBases) {
    for (const auto& pt : group_points(data, b)) {
      const double c = static_cast<double>(pt.total.coincidences);
      if (subtract) {
        // tau's own error is common to every point; fit_fringes propagates it separately.
        const auto corr = subtract_accidentals(pt.total, Measured{data.tau.value, 0.0}, false);
        samples[index_of(b)].push_back({pt.offset, corr.value, corr.sigma});
      } else {
        samples[index_of(b)].push_back({pt.offset, c, std::sqrt(std::max(c, 1.0))});
      }
    }
  }
  return samples;
}

double FringeFit::model(Basis b, double x) const {
  const auto& f = bases[index_of(b)];
  const double s = std::sin(kPi * (x - x0.value) / period - kPi * basis_shift_fraction(b));
  return f.offset + f.amplitude * s * s;
}

double FringeFit::min_position(Basis b) const {
  return period * wrap_unit(x0.value / period + basis_shift_fraction(b));
}

double FringeFit::max_position(Basis b) const {
  return period * wrap_unit(x0.value / period + basis_shift_fraction(b) + 0.5);
}

FringeFit fit_fringe_samples(const FringeSamples& samples, double period) {
  if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("fringe period must be positive");
  std::size_t n = 0;
  for (Basis b : kAllBases) {
    const auto& pts = samples[index_of(b)];
    if (pts.size() < 3) {
      throw DomainError(std::string("fringe fit needs at least 3 points in basis ") + to_string(b));
    }
    for (const auto& p : pts) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !(p.sigma > 0.0)) {
        throw DomainError("fringe samples must be finite with positive sigma");
      }
    }
    n += pts.size();
  }

  // For fixed x0 the model is linear in (o_k, a_k): profile those out and
  // search the one-dimensional chi2(x0) over a full period.
  int evaluations = 0;
  const auto profile = [&](double x0n, std::array<BasisLs, 4>* out) {
    ++evaluations;
    double total = 0.0;
    for (Basis b : kAllBases) {
      const auto ls = bounded_ls(samples[index_of(b)], x0n, basis_shift_fraction(b), period);
      if (out) (*out)[index_of(b)] = ls;
      total += ls.chi2;
    }
    return total;
  };

  constexpr int kScan = 360;
  std::vector<double> scan(kScan);
  for (int q = 0; q < kScan; ++q) scan[q] = profile(static_cast<double>(q) / kScan, nullptr);
  std::vector<int> minima;
  for (int q = 0; q < kScan; ++q) {
    if (scan[q] <= scan[(q + kScan - 1) % kScan] && scan[q] <= scan[(q + 1) % kScan]) minima.push_back(q);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) { return scan[a] < scan[b] || (scan[a] == scan[b] && a < b); });
  if (minima.size() > static_cast<std::size_t>(kStarts)) minima.resize(kStarts);

  // Golden-section refinement inside the bracketing scan cells.
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = 0.0;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (int q : minima) {
    double lo = (q - 1.0) / kScan;
    double hi = (q + 1.0) / kScan;
    double c = hi - golden * (hi - lo);
    double d = lo + golden * (hi - lo);
    double fc = profile(c, nullptr);
    double fd = profile(d, nullptr);
    while (hi - lo > 1e-13) {
      if (fc <= fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - golden * (hi - lo);
        fc = profile(c, nullptr);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + golden * (hi - lo);
        fd = profile(d, nullptr);
      }
    }
    const double x = 0.5 * (lo + hi);
    const double fx = profile(x, nullptr);
    if (fx < best_chi2) {
      best_chi2 = fx;
      best_x = x;
    }
  }
  if (!std::isfinite(best_chi2)) throw FitError("fringe fit: chi2 is not finite");

  std::array<BasisLs, 4> best_ls{};
  const double x0n = wrap_unit(best_x);
  best_chi2 = profile(x0n, &best_ls);

  FringeFit fit;
  fit.period = period;
  fit.chi2 = best_chi2;
  fit.dof = static_cast<int>(n) - 9;
  fit.starts = static_cast<int>(minima.size());
  fit.iterations = evaluations;

  // Covariance in the natural parameters (x0 / period, o_k, a_k).
  Eigen::MatrixXd jn = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 9);
  Eigen::Index row = 0;
  for (Basis b : kAllBases) {
    const int k = index_of(b);
    const double a = best_ls[k].a;
    for (const auto& pt : samples[k]) {
      const double phase = kPi * (pt.x / period - x0n - basis_shift_fraction(b));
      const double s = std::sin(phase);
      jn(row, 0) = -kPi * a * std::sin(2.0 * phase) / pt.sigma;
      jn(row, 1 + 2 * k) = 1.0 / pt.sigma;
      jn(row, 2 + 2 * k) = s * s / pt.sigma;
      ++row;
    }
  }
  const double inflate = fit.dof > 0 ? std::max(1.0, fit.chi2 / fit.dof) : 1.0;
  Eigen::MatrixXd cov = (jn.transpose() * jn).completeOrthogonalDecomposition().pseudoInverse() * inflate;
  cov.row(0) *= period;
  cov.col(0) *= period;

  fit.x0 = {x0n * period, std::sqrt(std::max(cov(0, 0), 0.0))};
  for (Basis b : kAllBases) {
    const int k = index_of(b);
    const double o = best_ls[k].o;
    const double a = best_ls[k].a;
    auto& bf = fit.bases[k];
    bf.offset = o;
    bf.amplitude = a;
    const double d = a + 2.0 * o;
    if (!(d > 0.0)) {
      // Flat zero fringe: visibility carries no information.
      bf.visibility = {0.0, 1.0};
      continue;
    }
    const double go = -2.0 * a / (d * d);
    const double ga = 2.0 * o / (d * d);
    const int io = 1 + 2 * k;
    const int ia = 2 + 2 * k;
    const double var = go * go * cov(io, io) + ga * ga * cov(ia, ia) + 2.0 * go * ga * cov(io, ia);
    bf.visibility = {a / d, std::sqrt(std::max(var, 0.0))};
  }
  fit.covariance.assign(cov.data(), cov.data() + cov.size());  // symmetric: storage order irrelevant
  return fit;
}

FringeFit fit_fringes(const FringeDataset& data, double period, bool subtract) {
  auto fit = fit_fringe_samples(fringe_samples(data, subtract), period);
  if (!subtract || !(data.tau.sigma > 0.0)) return fit;
  auto shifted = [&](double sign) {
    FringeDataset moved{data.records, {data.tau.value + sign * data.tau.sigma, 0.0}};
    return fit_fringe_samples(fringe_samples(moved, true), period);
  };
  const auto up = shifted(1.0);
  const auto down = shifted(-1.0);
  for (Basis b : kAllBases) {
    auto& v = fit.bases[index_of(b)].visibility;
    const double sys = 0.5 * std::abs(up[b].visibility.value - down[b].visibility.value);
    v.sigma = std::hypot(v.sigma, sys);
  }
  return fit;
}

Measured visibility_from_extrema(const Measured& max, const Measured& min) {
  const double s = max.value + min.value;
  if (!(s > 0.0)) throw UndefinedError("visibility undefined: max + min is not positive");
  if (min.value < 0.0) throw DomainError("visibility needs min >= 0");
  if (max.value < min.value) throw DomainError("visibility needs max >= min");
  const double gm = 2.0 * min.value / (s * s);
  const double gn = -2.0 * max.value / (s * s);
  return {(max.value - min.value) / s, std::hypot(gm * max.sigma, gn * min.sigma)};
}

Measured combine_visibilities(const Measured& v1, const Measured& v2) {
  return {(v1.value + v2.value) / 2.0, std::hypot(v1.sigma, v2.sigma) / 2.0};
}

WitnessResult witness(const Measured& v_da, const Measured& v_rl) {
  constexpr double tol = 1e-12;
  for (const auto* v : {&v_da, &v_rl}) {
    if (!(v->value >= -tol && v->value <= 1.0 + tol)) throw DomainError("witness visibilities must lie in [0, 1]");
    if (!(v->sigma >= 0.0)) throw DomainError("visibility uncertainty must be >= 0");
  }
  WitnessResult out;
  out.v_da = v_da;
  out.v_rl = v_rl;
  out.w = {v_da.value + v_rl.value, std::hypot(v_da.sigma, v_rl.sigma)};
  const double excess = out.w.value - 1.0;
  if (out.w.sigma > 0.0) {
    out.significance = excess / out.w.sigma;
  } else {
    out.significance = excess == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), excess);
  }
  return out;
}

WitnessResult witness_from_fit(const FringeFit& fit) {
  return witness(combine_visibilities(fit[Basis::D].visibility, fit[Basis::A].visibility),
                 combine_visibilities(fit[Basis::R].visibility, fit[Basis::L].visibility));
}

BlockStatistics block_statistics(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("block statistics need at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n), values.size()};
}

BlockWitnessResult witness_blocks(const FringeDataset& data, double period, std::size_t n_blocks, bool clamp) {
  if (n_blocks < 2) throw DomainError("witness blocks need at least two blocks");
  const auto pilot = fit_fringes(data, period, true);

  BlockWitnessResult out;
  std::array<const FringePoint*, 4> max_pt{};
  std::array<const FringePoint*, 4> min_pt{};
  std::array<std::vector<FringePoint>, 4> points;
  std::size_t intervals = std::numeric_limits<std::size_t>::max();
  const auto nearest = [&](const std::vector<FringePoint>& pts, double target) {
    const FringePoint* best = nullptr;
    double best_d = 0.0;
    for (const auto& p : pts) {
      const double d = std::abs(std::remainder(p.offset - target, period));
      if (!best || d < best_d) {
        best = &p;
        best_d = d;
      }
    }
    return best;
  };
  for (Basis b : kAllBases) {
    const int k = index_of(b);
    points[k] = group_points(data, b);
    max_pt[k] = nearest(points[k], pilot.max_position(b));
    min_pt[k] = nearest(points[k], pilot.min_position(b));
    out.max_offsets[k] = max_pt[k]->offset;
    out.min_offsets[k] = min_pt[k]->offset;
    intervals = std::min({intervals, max_pt[k]->parts.size(), min_pt[k]->parts.size()});
  }
  const std::size_t per_block = intervals / n_blocks;
  if (per_block == 0) {
    std::ostringstream msg;
    msg << "extremal points hold " << intervals << " intervals, fewer than " << n_blocks << " blocks";
    throw DomainError(msg.str());
  }
  out.intervals_per_block = per_block;
  out.dropped_intervals = intervals - per_block * n_blocks;

  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    BlockWitness bw{blk, true, kNaN, {kNaN, kNaN, kNaN, kNaN}, {}};
    const std::size_t begin = blk * per_block;
    const std::size_t end = begin + per_block;
    for (Basis b : kAllBases) {
      const int k = index_of(b);
      const auto hi = subtract_accidentals(sum_records(max_pt[k]->parts, begin, end), data.tau, clamp);
      const auto lo = subtract_accidentals(sum_records(min_pt[k]->parts, begin, end), data.tau, clamp);
      bw.visibilities[k] = bounded_visibility(hi.value, lo.value);
      if (std::isnan(bw.visibilities[k])) {
        bw.defined = false;
        if (!bw.note.empty()) bw.note += "; ";
        bw.note += std::string("corrected extrema of ") + to_string(b) + " sum to zero";
      }
    }
    if (bw.defined) {
      const auto& v = bw.visibilities;
      bw.w = (v[0] + v[1]) / 2.0 + (v[2] + v[3]) / 2.0;
      out.values.push_back(bw.w);
    }
    out.blocks.push_back(std::move(bw));
  }
  if (out.values.size() < 2) throw DomainError("fewer than two blocks have a defined witness");
  out.stats = block_statistics(out.values);
  return out;
}

OamPositionFit fit_rotation_series(const std::vector<RotationSample>& series) {
  OamPositionFit out{false, {kNaN, kNaN}, kNaN, 0.0, {}};
  if (series.size() < 6) {
    out.failure = "fewer than 6 samples";
    return out;
  }
  double lo = series.front().alpha;
  double hi = lo;
  double centre = 0.0;
  for (const auto& s : series) {
    if (!std::isfinite(s.alpha) || !std::isfinite(s.intensity) || !(s.sigma > 0.0)) {
      out.failure = "non-finite sample or non-positive sigma";
      return out;
    }
    lo = std::min(lo, s.alpha);
    hi = std::max(hi, s.alpha);
    centre += s.alpha;
  }
  centre /= static_cast<double>(series.size());
  const double range = hi - lo;
  if (!(range > 0.0)) {
    out.failure = "zero rotation range";
    return out;
  }
  const auto n = static_cast<Eigen::Index>(series.size());
  Eigen::VectorXd t(n), y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = (series[i].alpha - centre) / range;
    y(i) = series[i].intensity;
    w(i) = 1.0 / series[i].sigma;
  }

  // Periodogram over fringes-per-range q for the starting point.
  double best_q = 0.0;
  double best_chi2 = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_c = Eigen::Vector3d::Zero();
  const double q_max = 0.5 * static_cast<double>(n - 1);
  for (double q = 0.5; q <= q_max; q += 1.0 / 16.0) {
    Eigen::MatrixXd m(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ph = 2.0 * kPi * q * t(i);
      m(i, 0) = w(i);
      m(i, 1) = w(i) * std::cos(ph);
      m(i, 2) = w(i) * std::sin(ph);
    }
    const Eigen::VectorXd rhs = y.cwiseProduct(w);
    const Eigen::Vector3d c = m.colPivHouseholderQr().solve(rhs);
    const double chi2 = (rhs - m * c).squaredNorm();
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_q = q;
      best_c = c;
    }
  }
  const double amp = std::hypot(best_c(1), best_c(2));
  const double psi = std::atan2(best_c(2), best_c(1));

  // o + a sin^2(pi q (t - t0)) = o + a/2 - a/2 cos(2 pi q (t - t0)).
  Eigen::VectorXd p0(4);
  p0 << best_c(0) - amp, 2.0 * amp, (psi - kPi) / (2.0 * kPi * best_q), best_q;
  const auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    r.resize(n);
    jac.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ph = kPi * p(3) * (t(i) - p(2));
      const double s = std::sin(ph);
      const double s2 = std::sin(2.0 * ph);
      r(i) = (y(i) - p(0) - p(1) * s * s) * w(i);
      jac(i, 0) = w(i);
      jac(i, 1) = s * s * w(i);
      jac(i, 2) = -p(1) * s2 * kPi * p(3) * w(i);
      jac(i, 3) = p(1) * s2 * kPi * (t(i) - p(2)) * w(i);
    }
  };
  const auto res = detail::levenberg_marquardt(eval, p0);
  if (!res.converged) {
    out.failure = "fit did not converge";
    return out;
  }
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  eval(res.p, r, jac);
  const int dof = static_cast<int>(n) - 4;
  const double inflate = dof > 0 ? std::max(1.0, res.chi2 / dof) : 1.0;
  const Eigen::MatrixXd cov = (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse() * inflate;

  const double q = std::abs(res.p(3));
  out.fringes = q;
  out.period = range / q;
  out.l = {2.0 * kPi * q / range, 2.0 * kPi * std::sqrt(std::max(cov(3, 3), 0.0)) / range};
  if (q < 2.0 * (1.0 - 1e-9)) {
    out.failure = "fewer than 2 fringes in the scan";
    return out;
  }
  if (!(std::abs(res.p(1)) > 0.0)) {
    out.failure = "flat series";
    return out;
  }
  out.ok = true;
  return out;
}

OamEstimate estimate_oam(const std::vector<std::vector<RotationSample>>& positions) {
  if (positions.size() < 2) throw DomainError("OAM estimate needs at least two angular positions");
  OamEstimate est;
  std::vector<double> ls;
  for (const auto& series : positions) {
    est.positions.push_back(fit_rotation_series(series));
    if (est.positions.back().ok) ls.push_back(est.positions.back().l.value);
  }
  if (ls.size() < 2) {
    std::ostringstream msg;
    msg << "only " << ls.size() << " of " << positions.size() << " positions could be fitted";
    throw FitError(msg.str());
  }
  double mean = 0.0;
  for (double v : ls) mean += v;
  mean /= static_cast<double>(ls.size());
  double ss = 0.0;
  for (double v : ls) ss += (v - mean) * (v - mean);
  est.mean = mean;
  est.std = std::sqrt(ss / static_cast<double>(ls.size()));
  est.used = ls.size();
  return est;
}

std::size_t count_ring_maxima(std::span<const double> profile, double prominence) {
  const std::size_t n = profile.size();
  if (n < 3) throw DomainError("ring profile needs at least 3 samples");
  if (!(prominence > 0.0 && prominence < 1.0)) throw DomainError("prominence must lie in (0, 1)");
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = profile[(i + n - 1) % n];
    const double b = profile[i];
    const double c = profile[(i + 1) % n];
    if (!std::isfinite(b)) throw DomainError("ring profile contains non-finite values");
    s[i] = 0.25 * a + 0.5 * b + 0.25 * c;
  }
  const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
  const double range = *mx - *mn;
  if (!(range > 1e-12 * std::max(std::abs(*mx), 1e-300))) return 0;
  const double h = prominence * range;

  // Hysteresis walk starting from the global minimum.
  const std::size_t start = static_cast<std::size_t>(mn - s.begin());
  std::size_t count = 0;
  bool rising = true;
  double extreme = s[start];
  for (std::size_t k = 1; k <= n; ++k) {
    const double v = s[(start + k) % n];
    if (rising) {
      if (v > extreme) extreme = v;
      else if (v < extreme - h) {
        ++count;
        rising = false;
        extreme = v;
      }
    } else {
      if (v < extreme) extreme = v;
      else if (v > extreme + h) {
        rising = true;
        extreme = v;
      }
    }
  }
  if (n < 4 * count) {
    std::ostringstream msg;
    msg << "ring profile has " << n << " samples for " << count << " maxima; need at least 4 per fringe";
    throw SamplingError(msg.str(), 4.0 * static_cast<double>(count) / static_cast<double>(n));
  }
  return count;
}

}  // namespace hoam
