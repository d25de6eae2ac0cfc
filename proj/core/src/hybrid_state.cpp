#include "hoam/hybrid_state.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hoam/errors.hpp"

namespace hoam {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
constexpr double kMinHerald = 1e-15;

using Jones = std::array<Complex, 4>;  // row-major 2x2

Jones waveplate(double retardance, double angle) {
  // R(-t) diag(1, e^{i G}) R(t), R(t) = [[c, s], [-s, c]]
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Complex e = std::polar(1.0, retardance);
  return {c * c + e * s * s, c * s - e * c * s, c * s - e * c * s, s * s + e * c * c};
}

std::array<Complex, 2> adjoint_apply(const Jones& m, std::array<Complex, 2> v) {
  return {std::conj(m[0]) * v[0] + std::conj(m[2]) * v[1], std::conj(m[1]) * v[0] + std::conj(m[3]) * v[1]};
}

double wrap_pi(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

PolarizationProjector::PolarizationProjector(Complex h, Complex v, std::string label) : label_(std::move(label)) {
  const double n = std::sqrt(std::norm(h) + std::norm(v));
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("polarisation vector must be non-zero and finite");
  h_ = h / n;
  v_ = v / n;
}

PolarizationProjector PolarizationProjector::H() { return {1.0, 0.0, "H"}; }
PolarizationProjector PolarizationProjector::V() { return {0.0, 1.0, "V"}; }
PolarizationProjector PolarizationProjector::D() { return {kInvSqrt2, kInvSqrt2, "D"}; }
PolarizationProjector PolarizationProjector::A() { return {kInvSqrt2, -kInvSqrt2, "A"}; }
PolarizationProjector PolarizationProjector::R() { return {kInvSqrt2, Complex(0.0, kInvSqrt2), "R"}; }
PolarizationProjector PolarizationProjector::L() { return {kInvSqrt2, Complex(0.0, -kInvSqrt2), "L"}; }

PolarizationProjector PolarizationProjector::from_label(const std::string& label) {
  if (label == "H") return H();
  if (label == "V") return V();
  if (label == "D") return D();
  if (label == "A") return A();
  if (label == "R") return R();
  if (label == "L") return L();
  throw DomainError("unknown polarisation label '" + label + "'");
}

PolarizationProjector PolarizationProjector::from_waveplates(double hwp_angle, double qwp_angle) {
  // The detector sees (HWP QWP)|p>; it fires for |p> = QWP^dag HWP^dag |H>.
  const auto hwp = waveplate(kPi, hwp_angle);
  const auto qwp = waveplate(kPi / 2.0, qwp_angle);
  const auto p = adjoint_apply(qwp, adjoint_apply(hwp, {1.0, 0.0}));
  return {p[0], p[1]};
}

double PolarizationProjector::overlap(const PolarizationProjector& other) const {
  return std::norm(std::conj(h_) * other.h_ + std::conj(v_) * other.v_);
}

HybridState::HybridState(double a_, double b_, double phi_rel_, std::int64_t l_)
    : a(a_), b(b_), phi_rel(phi_rel_), l(l_) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("state amplitudes must be non-negative");
  if (std::abs(a * a + b * b - 1.0) > 1e-12) throw DomainError("state amplitudes must satisfy a^2 + b^2 = 1");
  if (l < 1) throw DomainError("OAM quanta l must be >= 1");
}

HybridState HybridState::maximally_entangled(std::int64_t l, double phi_rel) {
  return {kInvSqrt2, kInvSqrt2, phi_rel, l};
}

void RingMode::validate() const {
  if (l < 1) throw DomainError("ring mode needs l >= 1");
  if (std::abs(std::norm(c_plus) + std::norm(c_minus) - 1.0) > 1e-12) throw DomainError("ring mode is not normalised");
}

RingMode RingMode::superposition(std::int64_t l, double vartheta, double ring_radius) {
  RingMode m{kInvSqrt2, std::polar(kInvSqrt2, vartheta), l, ring_radius};
  m.validate();
  return m;
}

double RingMode::visibility() const { return 2.0 * std::abs(c_plus) * std::abs(c_minus); }

double RingMode::relative_phase() const { return std::arg(c_minus) - std::arg(c_plus); }

HybridState transfer(const PolarizationProjector& pol_in, std::int64_t l1, std::int64_t l2) {
  const std::int64_t l = l1 + l2;
  if (l == 0) throw DegenerateTransferError("transfer charges cancel: l1 + l2 = 0");
  if (l < 0) throw DomainError("transfer must add a positive total charge to H");
  const double a = std::abs(pol_in.h());
  const double b = std::abs(pol_in.v());
  const double phi = (a > 0.0 && b > 0.0) ? wrap_pi(std::arg(pol_in.v()) - std::arg(pol_in.h())) : 0.0;
  // Re-normalise against rounding so the state invariant holds to 1e-12.
  const double n = std::hypot(a, b);
  return {a / n, b / n, phi, l};
}

ConditionalMode conditional_mode(const HybridState& state, const PolarizationProjector& alice) {
  const Complex cp = state.a * std::conj(alice.h());
  const Complex cm = std::polar(state.b, state.phi_rel) * std::conj(alice.v());
  const double p = std::norm(cp) + std::norm(cm);
  if (p < kMinHerald) throw OrthogonalProjectionError("Alice's projector is orthogonal to the state");
  const double n = std::sqrt(p);
  return {RingMode{cp / n, cm / n, state.l, 0.0}, p};
}

double ring_intensity(const RingMode& mode, double theta) {
  const double two_l_theta = 2.0 * static_cast<double>(mode.l) * theta;
  const Complex cross = mode.c_plus * std::conj(mode.c_minus) * std::polar(1.0, two_l_theta);
  return std::norm(mode.c_plus) + std::norm(mode.c_minus) + 2.0 * cross.real();
}

double fringe_period(std::int64_t l) {
  if (l < 1) throw DomainError("fringe period needs l >= 1");
  return kPi / static_cast<double>(l);
}

double pattern_orientation(const RingMode& mode) {
  if (std::abs(mode.c_plus) < 1e-12 || std::abs(mode.c_minus) < 1e-12) {
    throw UndefinedError("a pure vortex ring has no orientation");
  }
  const double period = fringe_period(mode.l);
  double gamma = std::fmod(mode.relative_phase() / (2.0 * static_cast<double>(mode.l)), period);
  if (gamma < 0.0) gamma += period;
  if (gamma >= period) gamma -= period;
  return gamma * 180.0 / kPi;
}

double rotation_fringe(const RingMode& mode, double alpha, double theta_fixed) {
  RingMode turned = mode;
  turned.c_minus *= std::polar(1.0, static_cast<double>(mode.l) * alpha);
  return ring_intensity(turned, theta_fixed);
}

RingMode laser_mode(const PolarizationProjector& pol_in, std::int64_t l) {
  return conditional_mode(transfer(pol_in, 0, l), PolarizationProjector::D()).mode;
}

PairSource::PairSource(const HybridState& state)
    : l_(state.l), components_{{1.0, {state.a, 0.0, 0.0, std::polar(state.b, state.phi_rel)}}} {}

PairSource::PairSource(std::int64_t l, std::vector<Component> components) : l_(l), components_(std::move(components)) {
  if (l_ < 1) throw DomainError("pair source needs l >= 1");
  if (components_.empty()) throw DomainError("pair source needs at least one component");
  double total = 0.0;
  for (auto& c : components_) {
    if (!(c.weight >= 0.0)) throw DomainError("mixture weights must be non-negative");
    double n = 0.0;
    for (const auto& a : c.amplitudes) n += std::norm(a);
    if (!(n > 0.0)) throw DomainError("mixture component has zero norm");
    for (auto& a : c.amplitudes) a /= std::sqrt(n);
    total += c.weight;
  }
  if (!(total > 0.0)) throw DomainError("mixture weights sum to zero");
  for (auto& c : components_) c.weight /= total;
}

PairSource PairSource::with_coherence(const HybridState& state, double coherence) {
  if (!(coherence >= 0.0 && coherence <= 1.0)) throw DomainError("coherence must lie in [0, 1]");
  std::vector<Component> parts{{coherence, {state.a, 0.0, 0.0, std::polar(state.b, state.phi_rel)}}};
  const double incoherent = 1.0 - coherence;
  if (incoherent > 0.0) {
    if (state.a > 0.0) parts.push_back({incoherent * state.a * state.a, {1.0, 0.0, 0.0, 0.0}});
    if (state.b > 0.0) parts.push_back({incoherent * state.b * state.b, {0.0, 0.0, 0.0, 1.0}});
  }
  return {state.l, std::move(parts)};
}

PairSource PairSource::separable(std::int64_t l, const std::vector<std::pair<PolarizationProjector, RingMode>>& parts,
                                 const std::vector<double>& weights) {
  if (parts.size() != weights.size()) throw DomainError("separable mixture: weights and parts differ in length");
  std::vector<Component> comps;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& [pol, bob] = parts[k];
    comps.push_back({weights[k],
                     {pol.h() * bob.c_plus, pol.h() * bob.c_minus, pol.v() * bob.c_plus, pol.v() * bob.c_minus}});
  }
  return {l, std::move(comps)};
}

std::vector<ConditionalMode> PairSource::conditional_modes(const PolarizationProjector& alice) const {
  std::vector<ConditionalMode> out;
  const Complex ah = std::conj(alice.h());
  const Complex av = std::conj(alice.v());
  for (const auto& c : components_) {
    const Complex cp = ah * c.amplitudes[0] + av * c.amplitudes[2];
    const Complex cm = ah * c.amplitudes[1] + av * c.amplitudes[3];
    const double p = std::norm(cp) + std::norm(cm);
    if (p * c.weight < kMinHerald * 1e-3) continue;
    const double n = std::sqrt(p);
    out.push_back({RingMode{cp / n, cm / n, l_, 0.0}, c.weight * p});
  }
  return out;
}

double PairSource::heralding_probability(const PolarizationProjector& alice) const {
  double p = 0.0;
  for (const auto& m : conditional_modes(alice)) p += m.heralding_probability;
  return p;
}

double PairSource::conditional_ring_intensity(const PolarizationProjector& alice, double theta) const {
  const auto modes = conditional_modes(alice);
  double p = 0.0;
  double acc = 0.0;
  for (const auto& m : modes) {
    p += m.heralding_probability;
    acc += m.heralding_probability * ring_intensity(m.mode, theta);
  }
  if (p < kMinHerald) throw OrthogonalProjectionError("Alice's projector is orthogonal to every mixture component");
  return acc / p;
}

}  // namespace hoam
