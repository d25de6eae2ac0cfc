#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hoam/errors.hpp"
#include "hoam/io.hpp"
#include "hoam/runners.hpp"
#include "hoam/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kSampling = 3, kFit = 4, kIo = 5 };

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool ring_model = false;
  std::vector<std::string> formats;
  std::string counts;
};

hoam::Scenario resolve(const Options& opt, const std::string& expected_kind) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(hoam::io::read_file(opt.scenario));
  } catch (const nlohmann::json::parse_error& e) {
    throw hoam::ConfigError(opt.scenario + ": " + e.what());
  }
  if (opt.seed) doc["seed"] = *opt.seed;
  if (opt.ring_model) doc["ring_model"] = true;
  auto s = hoam::parse_scenario(doc);
  if (s.kind != expected_kind) {
    throw hoam::ConfigError("scenario kind '" + s.kind + "' does not match this subcommand (expects '" +
                            expected_kind + "')");
  }
  return s;
}

std::filesystem::path out_dir(const Options& opt, const hoam::Scenario& s) {
  if (!opt.out.empty()) return opt.out;
  if (!s.output_dir.empty()) return s.output_dir;
  return std::filesystem::path("out") / s.name;
}

void summarize(const std::string& command, const nlohmann::json& report, const std::filesystem::path& dir) {
  const auto& r = report.at("result");
  std::cout << command << ": ";
  if (r.contains("maxima")) {
    std::cout << r["maxima"] << " maxima (expected " << r["expected_maxima"] << ")";
  } else if (r.contains("mean") && r.contains("l_true")) {
    std::cout << "l = " << r["mean"].get<double>() << " +- " << r["std"].get<double>() << " over " << r["used"]
              << " positions";
  } else if (r.contains("witness_corrected")) {
    const auto& w = r["witness_corrected"]["w"];
    std::cout << "W = " << w["value"].get<double>() << " +- " << w["sigma"].get<double>() << " (corrected)";
  } else if (r.contains("method1")) {
    const auto& w = r["method1"]["witness"]["w"];
    std::cout << "method 1 W = " << w["value"].get<double>() << " +- " << w["sigma"].get<double>();
    if (r["method2"].contains("mean")) {
      std::cout << ", method 2 W = " << r["method2"]["mean"].get<double>() << " +- "
                << r["method2"]["sem"].get<double>();
    }
  }
  std::cout << "\n  wrote " << dir.string() << "\n";
}

int run(const std::string& command, const std::string& kind, const Options& opt) {
  const auto s = resolve(opt, kind);
  const auto dir = out_dir(opt, s);
  hoam::RunOutput out;
  if (command == "analyze") {
    if (opt.counts.empty()) throw hoam::ConfigError("analyze needs --counts <csv>");
    out = hoam::analyze(s, hoam::io::read_file(opt.counts));
  } else {
    out = hoam::run_scenario(s);
  }
  const std::set<std::string> formats(opt.formats.begin(), opt.formats.end());
  hoam::write_outputs(out, dir, formats);
  summarize(command, out.report, dir);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hoam: high-charge OAM mode and hybrid-entanglement simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hoam::version());

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"render", "render-mode"},
      {"calibrate-oam", "rotation-calibration"},
      {"iccd", "iccd-entanglement"},
      {"mask-scan", "mask-entanglement"},
      {"analyze", "mask-entanglement"},
  };
  const std::vector<std::string> blurbs{
      "render a transferred mode (full grid or ring model) and count its maxima",
      "simulate rotation fringes and estimate the OAM quanta",
      "simulate triggered camera stacks and the corrected witness",
      "simulate a mask scan and run both witness methods",
      "analyse an existing count CSV with a mask-entanglement scenario",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    auto* sub = app.add_subcommand(commands[k].first, blurbs[k]);
    sub->add_option("--scenario", opt.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the scenario seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--format", opt.formats, "restrict outputs to csv, pgm and/or json")
        ->check(CLI::IsMember({"csv", "pgm", "json"}))
        ->delimiter(',');
    if (commands[k].first == "render") sub->add_flag("--ring-model", opt.ring_model, "use the exact ring model");
    if (commands[k].first == "analyze") {
      sub->add_option("--counts", opt.counts, "count CSV to analyse")->required()->check(CLI::ExistingFile);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) return run(commands[k].first, commands[k].second, opt);
    }
    return kOther;
  } catch (const hoam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const hoam::SamplingError& e) {
    std::cerr << "sampling error: " << e.what() << "\n";
    return kSampling;
  } catch (const hoam::FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kFit;
  } catch (const hoam::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
