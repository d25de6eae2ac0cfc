#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hoam/detection.hpp"
#include "hoam/hybrid_state.hpp"

namespace hoam {

/// Value with a one-sigma uncertainty.
struct Measured {
  double value = 0.0;
  double sigma = 0.0;
};

enum class Basis { D = 0, A = 1, R = 2, L = 3 };

inline constexpr std::array<Basis, 4> kAllBases{Basis::D, Basis::A, Basis::R, Basis::L};

const char* to_string(Basis b);
/// "D", "A", "R" or "L"; throws DomainError otherwise.
Basis basis_from_label(const std::string& label);
PolarizationProjector projector(Basis b);

/// Fixed fringe shift of basis `b` relative to D, in units of the period:
/// A = 1/2, R = 3/4, L = 1/4.
double basis_shift_fraction(Basis b);

/// tau = acc * duration / (S1 * S2) from a delayed-signal run (counts over
/// `duration`). sigma propagates Poisson errors of acc, S1 and S2. acc = 0
/// gives tau = 0 with the one-count bound duration / (S1 S2). Zero singles
/// throw DomainError.
Measured estimate_coincidence_window(double acc_counts, double singles_alice, double singles_bob, double duration);
Measured estimate_coincidence_window(const CountRecord& delayed);

/// Expected accidental counts S1 S2 tau / T of a record, with uncertainty.
Measured expected_accidentals(const CountRecord& record, const Measured& tau);

/// coincidences - accidentals. With clamp, negative values become 0 (sigma kept).
Measured subtract_accidentals(const CountRecord& record, const Measured& tau, bool clamp);
Measured subtract_accidentals(const Measured& counts, const Measured& accidentals, bool clamp);

/// Raw count records of a mask scan plus the shared coincidence-window estimate.
/// Records with the same (setting, mask_offset) are repeated intervals of one
/// point and keep their order.
struct FringeDataset {
  std::vector<CountRecord> records;
  Measured tau;
};

/// One summed fringe point.
struct FringePoint {
  double offset;
  CountRecord total;               // summed over intervals
  std::vector<CountRecord> parts;  // individual intervals, in order
};

/// Records of basis `b` grouped by offset (sorted by offset). Settings that
/// are not D/A/R/L are ignored.
std::vector<FringePoint> group_points(const FringeDataset& data, Basis b);

struct FringeSample {
  double x;
  double y;
  double sigma;
};

using FringeSamples = std::array<std::vector<FringeSample>, 4>;

struct BasisFit {
  double offset;      // o_k
  double amplitude;   // a_k
  Measured visibility;
};

/// Joint fit of o_k + a_k sin^2(pi (x - x0 - s_k P) / P) over the four bases.
struct FringeFit {
  double period;
  Measured x0;
  std::array<BasisFit, 4> bases;
  /// Covariance of (x0, o_D, a_D, o_A, a_A, o_R, a_R, o_L, a_L), row-major 9x9,
  /// scaled by max(1, chi2 / dof).
  std::vector<double> covariance;
  double chi2;
  int dof;
  int starts;      // local minima of the x0 scan that were refined
  int iterations;  // chi2 profile evaluations

  const BasisFit& operator[](Basis b) const { return bases[static_cast<int>(b)]; }
  double model(Basis b, double x) const;
  /// Position of the fitted maximum / minimum of basis b in [0, period).
  double max_position(Basis b) const;
  double min_position(Basis b) const;
};

/// Weighted least squares with o_k, a_k >= 0. The amplitudes are solved
/// exactly for each x0 and x0 is found by a global scan plus golden-section
/// refinement. Throws DomainError with fewer than three samples in a basis and
/// FitError when chi2 is not finite.
FringeFit fit_fringe_samples(const FringeSamples& samples, double period);

/// Builds samples from the dataset (optionally accidental-subtracted, unclamped)
/// with sigma^2 = max(c, 1) + sigma_acc^2 and fits them. sigma_acc carries the
/// singles statistics only: the tau uncertainty shifts every point together,
/// so fit_fringes refits at tau +- sigma_tau and adds half the visibility
/// spread in quadrature instead.
FringeSamples fringe_samples(const FringeDataset& data, bool subtract);
FringeFit fit_fringes(const FringeDataset& data, double period, bool subtract);

/// (max - min)/(max + min) with first-order errors. Throws UndefinedError
/// when max + min <= 0 and DomainError when max < min or min < 0.
Measured visibility_from_extrema(const Measured& max, const Measured& min);

struct WitnessResult {
  Measured v_da;
  Measured v_rl;
  Measured w;
  double significance;
};

/// W = V_DA + V_RL, sigma in quadrature. Visibilities must lie in [0, 1].
WitnessResult witness(const Measured& v_da, const Measured& v_rl);

/// Mean of two visibilities with the combined error sqrt(s1^2 + s2^2) / 2.
Measured combine_visibilities(const Measured& v1, const Measured& v2);

/// Method 1: witness from the fitted per-basis visibilities.
WitnessResult witness_from_fit(const FringeFit& fit);

struct BlockStatistics {
  double mean;
  double sem;  // sample std (n - 1) / sqrt(n)
  std::size_t n;
};

/// Throws DomainError for fewer than two values.
BlockStatistics block_statistics(std::span<const double> values);

struct BlockWitness {
  std::size_t index;
  bool defined;
  double w;
  std::array<double, 4> visibilities;  // per basis, NaN when undefined
  std::string note;
};

struct BlockWitnessResult {
  std::vector<BlockWitness> blocks;
  std::vector<double> values;  // defined block witnesses
  BlockStatistics stats;
  std::array<double, 4> max_offsets;
  std::array<double, 4> min_offsets;
  std::size_t intervals_per_block;
  std::size_t dropped_intervals;
};

/// Method 2. A pilot fit (subtracted) picks, per basis, the scanned offsets
/// nearest the fitted maximum and minimum. The repeated intervals of those
/// points are cut into n_blocks equal blocks (a trailing remainder is dropped);
/// each block is accidental-subtracted (clamped if `clamp`) and turned into
/// extrema visibilities and a witness. Blocks whose witness is undefined are
/// excluded from the statistics and reported.
BlockWitnessResult witness_blocks(const FringeDataset& data, double period, std::size_t n_blocks = 10,
                                  bool clamp = true);

struct RotationSample {
  double alpha;  // rad
  double intensity;
  double sigma;
};

struct OamPositionFit {
  bool ok;
  Measured l;
  double period;  // fitted alpha period, rad
  double fringes; // scan range / period
  std::string failure;
};

struct OamEstimate {
  std::vector<OamPositionFit> positions;
  double mean;
  double std;  // population standard deviation over included positions
  std::size_t used;
};

/// Fits o + a sin^2(pi (alpha - alpha0) / P) with free P; l = 2 pi / P.
OamPositionFit fit_rotation_series(const std::vector<RotationSample>& series);

/// Throws DomainError for fewer than two positions and FitError when fewer
/// than two positions survive.
OamEstimate estimate_oam(const std::vector<std::vector<RotationSample>>& positions);

/// Number of maxima of a circular profile above `prominence` times its
/// peak-to-peak range, after a 3-tap circular smoothing. Throws SamplingError
/// when the profile has fewer than 4 samples per counted fringe.
std::size_t count_ring_maxima(std::span<const double> profile, double prominence = 0.2);

}  // namespace hoam
