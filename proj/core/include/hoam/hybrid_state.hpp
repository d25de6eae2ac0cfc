#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace hoam {

using Complex = std::complex<double>;

/// Unit Jones vector on the {H, V} basis. Alice's detector fires for the
/// polarisation this vector describes.
///
/// Conventions: D = (H + V)/sqrt2, A = (H - V)/sqrt2, R = (H + iV)/sqrt2,
/// L = (H - iV)/sqrt2.
class PolarizationProjector {
 public:
  /// Normalises (h, v); throws DomainError for the zero vector.
  PolarizationProjector(Complex h, Complex v, std::string label = {});

  static PolarizationProjector H();
  static PolarizationProjector V();
  static PolarizationProjector D();
  static PolarizationProjector A();
  static PolarizationProjector R();
  static PolarizationProjector L();

  /// One of "H", "V", "D", "A", "R", "L"; throws DomainError otherwise.
  static PolarizationProjector from_label(const std::string& label);

  /// State transmitted by a QWP at `qwp_angle` followed by a HWP at
  /// `hwp_angle` and a PBS passing H (angles in radians from the H axis).
  static PolarizationProjector from_waveplates(double hwp_angle, double qwp_angle);

  Complex h() const noexcept { return h_; }
  Complex v() const noexcept { return v_; }
  const std::string& label() const noexcept { return label_; }

  /// |<this|other>|^2.
  double overlap(const PolarizationProjector& other) const;

 private:
  Complex h_;
  Complex v_;
  std::string label_;
};

/// a|H>|+l> + exp(i phi_rel) b|V>|-l>, with a, b >= 0, a^2 + b^2 = 1, l >= 1.
struct HybridState {
  double a;
  double b;
  double phi_rel;
  std::int64_t l;

  HybridState(double a_, double b_, double phi_rel_, std::int64_t l_);

  static HybridState maximally_entangled(std::int64_t l, double phi_rel = 0.0);
};

/// Normalised Bob superposition c_plus|+l> + c_minus|-l> observed on a ring
/// of fixed radius.
struct RingMode {
  Complex c_plus;
  Complex c_minus;
  std::int64_t l;
  double ring_radius = 0.0;

  /// Throws DomainError unless |c+|^2 + |c-|^2 = 1 within 1e-12 and l >= 1.
  void validate() const;

  /// Equal-weight mode |+l> + exp(i vartheta)|-l>.
  static RingMode superposition(std::int64_t l, double vartheta, double ring_radius = 0.0);

  /// 2 |c+||c-|: the fringe visibility of the ring.
  double visibility() const;
  /// arg(c-) - arg(c+): the superposition phase vartheta.
  double relative_phase() const;
};

/// Two-step polarisation-to-OAM transfer: the H component acquires +(l1 + l2)
/// quanta and V acquires -(l1 + l2). Throws DegenerateTransferError when the
/// charges cancel and DomainError when their sum is negative.
HybridState transfer(const PolarizationProjector& pol_in, std::int64_t l1, std::int64_t l2);

struct ConditionalMode {
  RingMode mode;
  double heralding_probability;
};

/// Bob's mode conditioned on Alice detecting `alice`. Throws
/// OrthogonalProjectionError when the heralding probability is below 1e-15.
ConditionalMode conditional_mode(const HybridState& state, const PolarizationProjector& alice);

/// |c+ e^{il theta} + c- e^{-il theta}|^2 = 1 + V cos(2 l theta - vartheta).
/// Exact for any l; no grid involved.
double ring_intensity(const RingMode& mode, double theta);

/// Angular position (degrees) of the first intensity maximum, wrapped to
/// [0, 360 / (2l)). Equals vartheta / (2l) * 360 / (2 pi). Throws
/// UndefinedError for a pure vortex.
double pattern_orientation(const RingMode& mode);

/// Fringe period of the ring pattern in radians: pi / l.
double fringe_period(std::int64_t l);

/// Intensity at `theta_fixed` when the mirror imprinting -l in one arm is
/// turned by `alpha`: the -l component gains exp(i l alpha), giving
/// 1 + V cos(2 l theta - l alpha - vartheta). Maximum to minimum takes pi / l.
double rotation_fringe(const RingMode& mode, double alpha, double theta_fixed);

/// Mode produced by a classical beam polarised as `pol_in` after the
/// transfer of `l` quanta and the 45 degree polariser that erases the path.
RingMode laser_mode(const PolarizationProjector& pol_in, std::int64_t l);

/// Convex mixture of pure two-photon states in span{H,V} x span{+l,-l}.
///
/// Each component stores amplitudes {H+, H-, V+, V-} and a weight. A single
/// component reproduces a HybridState; additional components describe the
/// classically correlated (separable) admixtures used as witness controls.
class PairSource {
 public:
  struct Component {
    double weight;
    std::array<Complex, 4> amplitudes;  // H+l, H-l, V+l, V-l
  };

  explicit PairSource(const HybridState& state);
  PairSource(std::int64_t l, std::vector<Component> components);

  /// Fraction `coherence` of `state`, the rest the decohered mixture
  /// a^2 |H,+l><H,+l| + b^2 |V,-l><V,-l|.
  static PairSource with_coherence(const HybridState& state, double coherence);

  /// Separable mixture sum_k w_k |alice_k><alice_k| x |bob_k><bob_k|.
  static PairSource separable(std::int64_t l, const std::vector<std::pair<PolarizationProjector, RingMode>>& parts,
                              const std::vector<double>& weights);

  std::int64_t l() const noexcept { return l_; }
  const std::vector<Component>& components() const noexcept { return components_; }

  /// Probability that Alice's detector for `alice` fires.
  double heralding_probability(const PolarizationProjector& alice) const;

  /// Bob's conditional ring intensity (normalised to mean 1 over the ring)
  /// given Alice detects `alice`. Throws OrthogonalProjectionError when the
  /// heralding probability is below 1e-15.
  double conditional_ring_intensity(const PolarizationProjector& alice, double theta) const;

  /// Conditional modes with their (unnormalised) weights: sum of weights is
  /// the heralding probability.
  std::vector<ConditionalMode> conditional_modes(const PolarizationProjector& alice) const;

 private:
  std::int64_t l_;
  std::vector<Component> components_;
};

}  // namespace hoam
