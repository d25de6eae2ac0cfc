#include "hoam/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "hoam/errors.hpp"
#include "hoam/io.hpp"

namespace hoam {

namespace {

using json = nlohmann::json;
constexpr double kDeg = std::numbers::pi / 180.0;

// Typed access to one JSON object; remembers which keys were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(path_ + "." + key + ": required");
    return convert<T>(key);
  }

  Section child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Section(obj_.contains(key) ? obj_.at(key) : empty, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  template <typename T>
  T convert(const std::string& key) const {
    try {
      const auto& v = obj_.at(key);
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
        return d;
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
            throw ConfigError(where(key) + ": must be >= 0");
          }
        }
        return v.get<T>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

SourceSpec parse_source(Section s) {
  SourceSpec src;
  src.type = s.get<std::string>("type", src.type);
  src.separable = s.get<std::string>("separable", src.separable);
  src.polarization = s.get<std::string>("polarization", src.polarization);
  src.l1 = s.get<std::int64_t>("l1", src.l1);
  src.l2 = s.require<std::int64_t>("l2");
  src.coherence = s.get<double>("coherence", src.coherence);
  src.wavelength = s.get<double>("wavelength", src.wavelength);
  s.finish();
  check(src.type == "hybrid" || src.type == "separable", "source.type: expected hybrid or separable");
  if (src.type == "separable") {
    check(src.separable == "product" || src.separable == "decohered" || src.separable == "da-correlated",
          "source.separable: expected product, decohered or da-correlated");
  }
  check(src.l() >= 1, "source: l1 + l2 must be >= 1");
  check(src.coherence >= 0.0 && src.coherence <= 1.0, "source.coherence: must lie in [0, 1]");
  check(src.wavelength > 0.0, "source.wavelength: must be positive");
  try {
    PolarizationProjector::from_label(src.polarization);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("source.polarization: ") + e.what());
  }
  return src;
}

AliceSpec parse_alice(Section s) {
  AliceSpec a;
  a.hwp_error_deg = s.get<double>("hwp_error_deg", 0.0);
  a.qwp_error_deg = s.get<double>("qwp_error_deg", 0.0);
  auto eff = s.child("basis_efficiency");
  for (Basis b : kAllBases) {
    const std::string key = to_string(b);
    if (eff.has(key)) {
      const double v = eff.get<double>(key, 1.0);
      check(v > 0.0 && v <= 1.0, eff.where(key) + ": must lie in (0, 1]");
      a.basis_efficiency[key] = v;
    }
  }
  eff.finish();
  s.finish();
  return a;
}

RenderSpec parse_render(Section s) {
  RenderSpec r;
  r.grid = s.get<std::size_t>("grid", r.grid);
  r.dx = s.get<double>("dx", r.dx);
  r.waist = s.get<double>("waist", r.waist);
  r.distance = s.get<double>("distance", r.distance);
  r.focal_length = s.get<double>("focal_length", r.focal_length);
  r.segments = s.get<int>("segments", r.segments);
  r.uncut_radius = s.get<double>("uncut_radius", r.uncut_radius);
  r.rotation = s.get<double>("rotation", r.rotation);
  r.ring_samples = s.get<std::size_t>("ring_samples", r.ring_samples);
  r.prominence = s.get<double>("prominence", r.prominence);
  s.finish();
  check(r.grid >= 16, "render.grid: must be >= 16");
  check(r.dx > 0.0, "render.dx: must be positive");
  check(r.waist > 0.0, "render.waist: must be positive");
  check(r.distance >= 0.0, "render.distance: must be >= 0");
  check(r.focal_length >= 0.0, "render.focal_length: must be >= 0");
  check(r.segments >= 1, "render.segments: must be >= 1");
  check(r.uncut_radius >= 0.0, "render.uncut_radius: must be >= 0");
  check(r.prominence > 0.0 && r.prominence < 1.0, "render.prominence: must lie in (0, 1)");
  return r;
}

RotationSpec parse_rotation(Section s) {
  RotationSpec r;
  r.positions = s.get<std::size_t>("positions", r.positions);
  r.fringes = s.get<double>("fringes", r.fringes);
  r.samples_per_fringe = s.get<std::size_t>("samples_per_fringe", r.samples_per_fringe);
  r.visibility = s.get<double>("visibility", r.visibility);
  r.counts = s.get<double>("counts", r.counts);
  r.squeeze_amplitude = s.get<double>("squeeze_amplitude", r.squeeze_amplitude);
  r.squeeze_phase_deg = s.get<double>("squeeze_phase_deg", r.squeeze_phase_deg);
  r.scale_bias = s.get<double>("scale_bias", r.scale_bias);
  r.stage_offset_deg = s.get<double>("stage_offset_deg", r.stage_offset_deg);
  r.jitter_deg = s.get<double>("jitter_deg", r.jitter_deg);
  s.finish();
  check(r.positions >= 2, "rotation.positions: must be >= 2");
  check(r.fringes >= 2.0, "rotation.fringes: must be >= 2");
  check(r.samples_per_fringe >= 4, "rotation.samples_per_fringe: must be >= 4");
  check(r.visibility > 0.0 && r.visibility <= 1.0, "rotation.visibility: must lie in (0, 1]");
  check(r.counts >= 0.0, "rotation.counts: must be >= 0");
  check(std::abs(r.squeeze_amplitude) + std::abs(r.scale_bias) < 0.5, "rotation: systematics must stay below 50%");
  check(r.stage_offset_deg >= 0.0 && r.jitter_deg >= 0.0, "rotation: stage errors must be >= 0");
  return r;
}

IccdSpec parse_iccd(Section s) {
  IccdSpec i;
  auto& c = i.config;
  c.quantum_efficiency = s.get<double>("quantum_efficiency", c.quantum_efficiency);
  c.pixel_pitch = s.get<double>("pixel_pitch", c.pixel_pitch);
  c.max_trigger_rate = s.get<double>("max_trigger_rate", c.max_trigger_rate);
  c.gate_window = s.get<double>("gate_window", c.gate_window);
  c.accidental_rate_per_image = s.get<double>("accidentals_per_frame", c.accidental_rate_per_image);
  c.frames = s.get<int>("frames", c.frames);
  c.exposure_per_frame = s.get<double>("exposure_per_frame", c.exposure_per_frame);
  c.trigger_rate = s.get<double>("trigger_rate", c.trigger_rate);
  c.bob_efficiency = s.get<double>("bob_efficiency", c.bob_efficiency);
  i.nx = s.get<std::size_t>("nx", i.nx);
  i.ny = s.get<std::size_t>("ny", i.ny);
  i.ring_radius = s.get<double>("ring_radius", i.ring_radius);
  i.ring_width = s.get<double>("ring_width", i.ring_width);
  i.phase_bins = s.get<std::size_t>("phase_bins", i.phase_bins);
  s.finish();
  // The sensor window is centred on the ring at theta = 0.
  c.axis = {-i.ring_radius, 0.0};
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("iccd: ") + e.what());
  }
  check(i.nx >= 8 && i.ny >= 8, "iccd: window must be at least 8x8 pixels");
  check(i.ring_radius > 0.0 && i.ring_width > 0.0, "iccd: ring radius and width must be positive");
  check(i.phase_bins >= 8, "iccd.phase_bins: must be >= 8");
  return i;
}

MaskSpec parse_mask(Section s) {
  MaskSpec m;
  m.n_slits = s.get<int>("n_slits", m.n_slits);
  m.width_over_pitch = s.get<double>("width_over_pitch", m.width_over_pitch);
  if (s.has("angular_pitch")) m.angular_pitch = s.get<double>("angular_pitch", 0.0);
  m.mode = s.get<std::string>("mode", m.mode);
  m.radius = s.get<double>("radius", m.radius);
  m.max_arc_span = s.get<double>("max_arc_span", m.max_arc_span);
  m.scan_fringes = s.get<double>("scan_fringes", m.scan_fringes);
  m.points = s.get<std::size_t>("points", m.points);
  m.start_offset = s.get<double>("start_offset", m.start_offset);
  s.finish();
  check(m.mode == "angular" || m.mode == "linearized", "mask.mode: expected angular or linearized");
  check(m.n_slits >= 1, "mask.n_slits: must be >= 1");
  check(m.width_over_pitch > 0.0 && m.width_over_pitch < 1.0, "mask.width_over_pitch: must lie in (0, 1)");
  check(m.scan_fringes > 0.0, "mask.scan_fringes: must be positive");
  check(m.points >= 3, "mask.points: must be >= 3");
  if (m.mode == "linearized") check(m.radius > 0.0, "mask.radius: linearized masks need a positive radius");
  return m;
}

DetectorSpec parse_detector(Section s) {
  DetectorSpec d;
  d.pair_rate = s.require<double>("pair_rate");
  d.singles_alice = s.require<double>("singles_alice");
  d.singles_bob = s.require<double>("singles_bob");
  d.efficiency_bob = s.get<double>("efficiency_bob", d.efficiency_bob);
  d.coincidence_window = s.get<double>("coincidence_window", d.coincidence_window);
  d.interval = s.get<double>("interval", d.interval);
  d.intervals = s.get<std::size_t>("intervals", d.intervals);
  d.delayed_duration = s.get<double>("delayed_duration", d.delayed_duration);
  d.noiseless = s.get<bool>("noiseless", d.noiseless);
  s.finish();
  check(d.pair_rate >= 0.0 && d.singles_alice >= 0.0 && d.singles_bob >= 0.0, "detector: rates must be >= 0");
  check(d.efficiency_bob >= 0.0 && d.efficiency_bob <= 1.0, "detector.efficiency_bob: must lie in [0, 1]");
  check(d.coincidence_window > 0.0, "detector.coincidence_window: must be positive");
  check(d.interval > 0.0, "detector.interval: must be positive");
  check(d.intervals >= 1, "detector.intervals: must be >= 1");
  check(d.delayed_duration >= 0.0, "detector.delayed_duration: must be >= 0");
  return d;
}

AnalysisSpec parse_analysis(Section s) {
  AnalysisSpec a;
  a.subtract = s.get<bool>("subtract", a.subtract);
  a.blocks = s.get<std::size_t>("blocks", a.blocks);
  a.clamp = s.get<bool>("clamp", a.clamp);
  if (s.has("tau")) {
    auto t = s.child("tau");
    a.tau = Measured{t.require<double>("value"), t.require<double>("sigma")};
    t.finish();
    check(a.tau->value >= 0.0 && a.tau->sigma >= 0.0, "analysis.tau: value and sigma must be >= 0");
  }
  s.finish();
  check(a.blocks >= 2, "analysis.blocks: must be >= 2");
  return a;
}

json source_json(const SourceSpec& s) {
  json j{{"type", s.type}, {"polarization", s.polarization}, {"l1", s.l1}, {"l2", s.l2},
         {"coherence", s.coherence}, {"wavelength", s.wavelength}};
  if (s.type == "separable") j["separable"] = s.separable;
  return j;
}

json alice_json(const AliceSpec& a) {
  json eff = json::object();
  for (const auto& [k, v] : a.basis_efficiency) eff[k] = v;
  return {{"hwp_error_deg", a.hwp_error_deg}, {"qwp_error_deg", a.qwp_error_deg}, {"basis_efficiency", eff}};
}

json analysis_json(const AnalysisSpec& a) {
  json j{{"subtract", a.subtract}, {"blocks", a.blocks}, {"clamp", a.clamp}};
  if (a.tau) j["tau"] = {{"value", a.tau->value}, {"sigma", a.tau->sigma}};
  return j;
}

}  // namespace

HybridState SourceSpec::state() const {
  return transfer(PolarizationProjector::from_label(polarization), l1, l2);
}

PairSource SourceSpec::pair_source() const {
  const auto st = state();
  if (type == "hybrid") return PairSource::with_coherence(st, coherence);
  if (separable == "product") return PairSource(HybridState(1.0, 0.0, 0.0, st.l));
  if (separable == "decohered") return PairSource::with_coherence(st, 0.0);
  // D heralds the D-conditional mode, A the A-conditional one, without coherence between them.
  const auto d_mode = conditional_mode(HybridState::maximally_entangled(st.l), PolarizationProjector::D()).mode;
  const auto a_mode = conditional_mode(HybridState::maximally_entangled(st.l), PolarizationProjector::A()).mode;
  return PairSource::separable(st.l, {{PolarizationProjector::D(), d_mode}, {PolarizationProjector::A(), a_mode}},
                               {0.5, 0.5});
}

PolarizationProjector AliceSpec::projector(Basis b) const {
  if (hwp_error_deg == 0.0 && qwp_error_deg == 0.0) return hoam::projector(b);
  double hwp = 0.0;
  double qwp = 45.0;
  switch (b) {
    case Basis::D: hwp = 22.5; break;
    case Basis::A: hwp = -22.5; break;
    case Basis::R: break;
    case Basis::L: qwp = -45.0; break;
  }
  const auto p = PolarizationProjector::from_waveplates((hwp + hwp_error_deg) * kDeg, (qwp + qwp_error_deg) * kDeg);
  return {p.h(), p.v(), to_string(b)};
}

double AliceSpec::efficiency(Basis b) const {
  const auto it = basis_efficiency.find(to_string(b));
  return it == basis_efficiency.end() ? 1.0 : it->second;
}

double Scenario::mask_period() const {
  return mask.angular_pitch ? *mask.angular_pitch : fringe_period(source.l());
}

SlitMask Scenario::slit_mask(double offset) const {
  SlitMask m;
  m.n_slits = mask.n_slits;
  m.angular_pitch = mask_period();
  m.slit_width = mask.width_over_pitch * m.angular_pitch;
  m.arc_offset = offset;
  if (mask.mode == "linearized") {
    m.linearization_radius = mask.radius;
    return linearize_mask(m, mask.max_arc_span).mask;
  }
  m.validate();
  return m;
}

bool Scenario::stochastic() const {
  if (kind == "rotation-calibration") return rotation.counts > 0.0 || rotation.stage_offset_deg > 0.0 ||
                                              rotation.jitter_deg > 0.0;
  if (kind == "mask-entanglement") return !detector.noiseless;
  return kind == "iccd-entanglement";
}

Scenario parse_scenario(const nlohmann::json& doc) {
  Section root(doc, "scenario");
  Scenario s;
  s.kind = root.require<std::string>("kind");
  s.name = root.get<std::string>("name", s.kind);
  if (root.has("seed")) s.seed = root.get<std::uint64_t>("seed", 0);
  s.output_dir = root.get<std::string>("output_dir", "");
  s.ring_model = root.get<bool>("ring_model", false);

  if (s.kind == "render-mode") {
    s.source = parse_source(root.child("source"));
    s.render = parse_render(root.child("render"));
  } else if (s.kind == "rotation-calibration") {
    s.source = parse_source(root.child("source"));
    s.rotation = parse_rotation(root.child("rotation"));
  } else if (s.kind == "iccd-entanglement") {
    s.source = parse_source(root.child("source"));
    s.alice = parse_alice(root.child("alice"));
    s.iccd = parse_iccd(root.child("iccd"));
  } else if (s.kind == "mask-entanglement") {
    s.source = parse_source(root.child("source"));
    s.alice = parse_alice(root.child("alice"));
    s.mask = parse_mask(root.child("mask"));
    s.detector = parse_detector(root.child("detector"));
    s.analysis = parse_analysis(root.child("analysis"));
    if (s.mask.mode == "linearized") {
      try {
        s.slit_mask(s.mask.start_offset);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("mask: ") + e.what());
      }
    } else {
      try {
        s.slit_mask(0.0);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("mask: ") + e.what());
      }
    }
  } else {
    throw ConfigError("scenario.kind: expected render-mode, rotation-calibration, iccd-entanglement or "
                      "mask-entanglement, got '" + s.kind + "'");
  }
  root.finish();
  if (s.stochastic() && !s.seed) throw ConfigError("scenario.seed: required for stochastic runs");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

nlohmann::json to_json(const Scenario& s) {
  json j{{"kind", s.kind}, {"name", s.name}, {"source", source_json(s.source)}};
  if (s.seed) j["seed"] = *s.seed;
  if (!s.output_dir.empty()) j["output_dir"] = s.output_dir;
  if (s.kind == "render-mode") {
    const auto& r = s.render;
    j["ring_model"] = s.ring_model;
    j["render"] = {{"grid", r.grid},         {"dx", r.dx},
                   {"waist", r.waist},       {"distance", r.distance},
                   {"focal_length", r.focal_length}, {"segments", r.segments},
                   {"uncut_radius", r.uncut_radius}, {"rotation", r.rotation},
                   {"ring_samples", r.ring_samples}, {"prominence", r.prominence}};
  } else if (s.kind == "rotation-calibration") {
    const auto& r = s.rotation;
    j["rotation"] = {{"positions", r.positions}, {"fringes", r.fringes},
                     {"samples_per_fringe", r.samples_per_fringe}, {"visibility", r.visibility},
                     {"counts", r.counts}, {"squeeze_amplitude", r.squeeze_amplitude},
                     {"squeeze_phase_deg", r.squeeze_phase_deg}, {"scale_bias", r.scale_bias},
                     {"stage_offset_deg", r.stage_offset_deg}, {"jitter_deg", r.jitter_deg}};
  } else if (s.kind == "iccd-entanglement") {
    const auto& i = s.iccd;
    const auto& c = i.config;
    j["alice"] = alice_json(s.alice);
    j["iccd"] = {{"quantum_efficiency", c.quantum_efficiency}, {"pixel_pitch", c.pixel_pitch},
                 {"max_trigger_rate", c.max_trigger_rate}, {"gate_window", c.gate_window},
                 {"accidentals_per_frame", c.accidental_rate_per_image}, {"frames", c.frames},
                 {"exposure_per_frame", c.exposure_per_frame}, {"trigger_rate", c.trigger_rate},
                 {"bob_efficiency", c.bob_efficiency}, {"nx", i.nx}, {"ny", i.ny},
                 {"ring_radius", i.ring_radius}, {"ring_width", i.ring_width}, {"phase_bins", i.phase_bins}};
  } else if (s.kind == "mask-entanglement") {
    const auto& m = s.mask;
    const auto& d = s.detector;
    j["alice"] = alice_json(s.alice);
    j["mask"] = {{"n_slits", m.n_slits}, {"width_over_pitch", m.width_over_pitch},
                 {"angular_pitch", s.mask_period()}, {"mode", m.mode}, {"radius", m.radius},
                 {"max_arc_span", m.max_arc_span}, {"scan_fringes", m.scan_fringes}, {"points", m.points},
                 {"start_offset", m.start_offset}};
    j["detector"] = {{"pair_rate", d.pair_rate}, {"singles_alice", d.singles_alice},
                     {"singles_bob", d.singles_bob}, {"efficiency_bob", d.efficiency_bob},
                     {"coincidence_window", d.coincidence_window}, {"interval", d.interval},
                     {"intervals", d.intervals}, {"delayed_duration", d.delayed_duration},
                     {"noiseless", d.noiseless}};
    j["analysis"] = analysis_json(s.analysis);
  }
  return j;
}

}  // namespace hoam
