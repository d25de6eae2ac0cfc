#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hoam/errors.hpp"
#include "hoam/scenario.hpp"

using namespace hoam;
using nlohmann::json;

namespace {

json mask_doc() {
  return json::parse(R"({
    "kind": "mask-entanglement", "seed": 3,
    "source": {"l2": 1000},
    "mask": {"mode": "angular"},
    "detector": {"pair_rate": 1e6, "singles_alice": 2e5, "singles_bob": 1e5, "efficiency_bob": 0.1}
  })");
}

std::string config_message(const json& doc) {
  try {
    (void)parse_scenario(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("every preset parses and echoes") {
  for (const auto& entry : std::filesystem::directory_iterator(HOAM_PRESET_DIR)) {
    CAPTURE(entry.path().string());
    const auto s = load_scenario(entry.path());
    CHECK(s.name == entry.path().stem().string());
    // The resolved echo is itself a valid scenario with the same echo.
    const auto again = parse_scenario(to_json(s));
    CHECK(to_json(again) == to_json(s));
  }
}

TEST_CASE("defaults and derived quantities") {
  const auto s = parse_scenario(mask_doc());
  CHECK(s.kind == "mask-entanglement");
  CHECK(s.name == "mask-entanglement");
  CHECK(s.source.l() == 1000);
  CHECK(s.mask.n_slits == 60);
  CHECK(s.mask_period() == doctest::Approx(std::numbers::pi / 1000));
  CHECK(s.slit_mask(0.0).slit_width == doctest::Approx(std::numbers::pi / 7000));
  CHECK(s.detector.coincidence_window == 4.68e-9);
  CHECK(s.stochastic());
  CHECK(*s.seed == 3);
}

TEST_CASE("unknown keys name the offending path") {
  auto doc = mask_doc();
  doc["detector"]["pair_rat"] = 1.0;
  CHECK(config_message(doc).find("detector.pair_rat") != std::string::npos);
  doc = mask_doc();
  doc["colour"] = "blue";
  CHECK(config_message(doc).find("colour") != std::string::npos);
}

TEST_CASE("malformed values are config errors") {
  auto doc = mask_doc();
  doc["detector"]["pair_rate"] = "fast";
  CHECK(config_message(doc).find("detector.pair_rate") != std::string::npos);
  doc = mask_doc();
  doc["kind"] = "telescope";
  CHECK_FALSE(config_message(doc).empty());
  doc = mask_doc();
  doc["source"]["l2"] = 0;
  CHECK_FALSE(config_message(doc).empty());
  doc = mask_doc();
  doc["mask"]["width_over_pitch"] = 1.5;
  CHECK_FALSE(config_message(doc).empty());
  doc = mask_doc();
  doc["mask"]["mode"] = "linearized";
  doc["mask"]["radius"] = 2e-3;
  doc["mask"]["max_arc_span"] = 0.01;
  CHECK(config_message(doc).find("mask") != std::string::npos);
  doc = mask_doc();
  doc.erase("kind");
  CHECK(config_message(doc).find("kind") != std::string::npos);
}

TEST_CASE("seed is mandatory for stochastic runs only") {
  auto doc = mask_doc();
  doc.erase("seed");
  CHECK(config_message(doc).find("seed") != std::string::npos);
  doc["detector"]["noiseless"] = true;
  CHECK_NOTHROW(parse_scenario(doc));

  const auto render = json::parse(R"({"kind": "render-mode", "source": {"l2": 3}})");
  CHECK_FALSE(parse_scenario(render).stochastic());
  const auto iccd = json::parse(R"({"kind": "iccd-entanglement", "source": {"l2": 3}})");
  CHECK(config_message(iccd).find("seed") != std::string::npos);
}

TEST_CASE("unreadable scenario files") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
}
