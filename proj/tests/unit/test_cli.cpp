#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hoam/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / ("hoam_cli_test_" + std::to_string(::getpid()));

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::string& args) {
  fs::create_directories(kWork);
  const auto out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + HOAM_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, hoam::io::read_file(out), hoam::io::read_file(err)};
}

std::string preset(const std::string& name) { return std::string(HOAM_PRESET_DIR) + "/" + name + ".json"; }

fs::path write_scenario(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const auto p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("render succeeds and reports the maxima") {
  const auto r = run("render --scenario " + preset("fig2_l500_ring") + " --out " + (kWork / "ring").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("1000 maxima") != std::string::npos);
  CHECK(fs::exists(kWork / "ring" / "report.json"));
}

TEST_CASE("aliasing render exits with the sampling code and names the grid") {
  const auto r = run("render --scenario " + preset("fig2_l10010") + " --out " + (kWork / "alias").string());
  CHECK(r.code == 3);
  CHECK(r.err.find("65536x65536") != std::string::npos);
  const auto ok = run("render --ring-model --scenario " + preset("fig2_l10010") + " --out " +
                      (kWork / "alias_ring").string() + " --format json");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("20020 maxima") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "alias_ring" / "ring_profile.csv"));
}

TEST_CASE("configuration problems exit with the config code") {
  CHECK(run("render --scenario /nonexistent.json").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("render --scenario " + preset("fig2_l500_ring") + " --format tiff").code == 2);
  // Kind mismatch between subcommand and scenario.
  CHECK(run("mask-scan --scenario " + preset("fig2_l500_ring")).code == 2);
  const auto bad = write_scenario("bad.json", R"({"kind": "render-mode", "source": {"l2": 3}, "rendr": {}})");
  const auto r = run("render --scenario " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("rendr") != std::string::npos);
  const auto broken = write_scenario("broken.json", "{\"kind\": ");
  CHECK(run("render --scenario " + broken.string()).code == 2);
  const auto seedless = write_scenario("seedless.json", R"({"kind": "iccd-entanglement", "source": {"l2": 3}})");
  CHECK(run("iccd --scenario " + seedless.string()).code == 2);
}

TEST_CASE("unwritable output exits with the io code") {
  const auto blocker = write_scenario("blocker", "x");
  CHECK(run("render --scenario " + preset("fig2_l500_ring") + " --out " + (blocker / "sub").string()).code == 5);
}

TEST_CASE("seeded reruns are byte-identical and the seed flag matters") {
  const auto a = kWork / "fig4_a", b = kWork / "fig4_b", c = kWork / "fig4_c";
  REQUIRE(run("mask-scan --scenario " + preset("fig4_mask_l1000") + " --out " + a.string()).code == 0);
  REQUIRE(run("mask-scan --scenario " + preset("fig4_mask_l1000") + " --out " + b.string()).code == 0);
  REQUIRE(run("mask-scan --scenario " + preset("fig4_mask_l1000") + " --seed 5 --out " + c.string()).code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    CHECK(hoam::io::read_file(e.path()) == hoam::io::read_file(b / e.path().filename()));
  }
  CHECK(files >= 2);
  CHECK(hoam::io::read_file(a / "counts.csv") != hoam::io::read_file(c / "counts.csv"));
}

TEST_CASE("analyze reproduces the mask-scan report from its counts") {
  const auto a = kWork / "fig4_scan", b = kWork / "fig4_analyze";
  REQUIRE(run("mask-scan --scenario " + preset("fig4_mask_l1000") + " --out " + a.string()).code == 0);
  const auto r = run("analyze --scenario " + preset("fig4_mask_l1000") + " --counts " + (a / "counts.csv").string() +
                     " --out " + b.string());
  REQUIRE(r.code == 0);
  const auto ra = nlohmann::json::parse(hoam::io::read_file(a / "report.json"));
  const auto rb = nlohmann::json::parse(hoam::io::read_file(b / "report.json"));
  CHECK(ra["result"]["method1"] == rb["result"]["method1"]);
  CHECK(run("analyze --scenario " + preset("fig4_mask_l1000")).code == 2);
}

TEST_CASE("every subcommand runs its preset") {
  CHECK(run("calibrate-oam --scenario " + preset("figS1_ideal") + " --out " + (kWork / "s1").string()).code == 0);
  CHECK(run("iccd --scenario " + preset("fig3_iccd") + " --out " + (kWork / "fig3").string()).code == 0);
  CHECK(fs::exists(kWork / "fig3" / "report.json"));
  CHECK(run("--version").code == 0);
  fs::remove_all(kWork);
}
