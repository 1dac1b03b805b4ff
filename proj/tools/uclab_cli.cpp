// uclab: batch front-end. Exit codes: 0 all checks pass, 1 a check failed,
// 2 configuration error, 3 I/O error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uclab/battery.hpp"
#include "uclab/config.hpp"
#include "uclab/report.hpp"
#include "uclab/run.hpp"

namespace {

constexpr int kPass = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3;

int finish(const uclab::VerificationReport& rep, const std::string& dir, const std::string& format) {
  for (const auto& r : rep.records)
    std::printf("%-12s %s  %s\n", uclab::to_string(r.status), r.name.c_str(), r.detail.c_str());
  for (const auto& p : uclab::emit(rep, dir, format)) std::printf("wrote %s\n", p.c_str());
  const bool ok = rep.overall() == uclab::Status::pass;
  std::printf("overall: %s\n", ok ? "pass" : "fail");
  return ok ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carleman-estimate verification laboratory"};
  std::string config_path, out_dir, format, preset;
  std::optional<int> refine;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration (JSON, schema 1)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "json | csv-bundle")->check(CLI::IsMember({"json", "csv-bundle"}));
  app.add_option("--preset", preset, "built-in run")->check(CLI::IsMember({"battery"}));
  app.add_option("--refine", refine, "number of refinement levels (factors 1, 2, 4, ...)")->check(CLI::Range(1, 6));
  app.add_option("--seed", seed, "seed for randomized fields");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    uclab::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = uclab::load_config(config_path);
    } else if (preset.empty()) {
      std::cerr << "uclab: one of --config or --preset is required\n";
      return kConfigError;
    }
    if (!preset.empty()) cfg.command = preset;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) cfg.format = format;
    if (refine) cfg.refine = uclab::refinement_levels(*refine);
    if (seed) cfg.seed = *seed;

    if (cfg.command == "battery") {
      uclab::BatteryOptions o;
      o.levels = cfg.refine;
      o.seed = cfg.seed;
      const auto results = uclab::run_battery(o);
      for (const auto& c : results)
        std::printf("AC%-2d %s  %s: %s\n", c.id, c.passed() ? "PASS" : "FAIL", c.title.c_str(), c.summary.c_str());
      uclab::Json echo = cfg.raw.is_null() ? uclab::Json::object() : cfg.raw;
      echo["preset"] = "battery";
      echo["seed"] = cfg.seed;
      echo["refine"] = cfg.refine;
      return finish(uclab::battery_report(results, echo), cfg.out_dir, cfg.format);
    }
    return finish(uclab::run_command(cfg), cfg.out_dir, cfg.format);
  } catch (const uclab::Error& e) {
    std::cerr << "uclab: " << e.what() << "\n";
    return e.code() == uclab::ErrorCode::io_error ? kIoError : kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "uclab: " << e.what() << "\n";
    return kConfigError;
  }
}
