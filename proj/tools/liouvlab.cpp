// Command-line front end: run a suite, re-render a stored run, or validate a config.
// Exit codes: 0 success or soft failure, 1 validation error, 2 I/O error,
// 3 failed checks under --strict or a numerical breakdown.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "liouvlab/harness/config.hpp"
#include "liouvlab/harness/container.hpp"
#include "liouvlab/harness/report.hpp"
#include "liouvlab/harness/suites.hpp"

namespace fs = std::filesystem;
using namespace liouvlab;
using namespace liouvlab::harness;

namespace {

constexpr int kOk = 0, kValidation = 1, kIo = 2, kFailed = 3;

int run_command(const std::string& config_path, const std::optional<std::string>& suite,
                const std::optional<std::uint64_t>& seed, bool strict, const std::string& out, bool serial) {
  ExperimentConfig config = load_config(config_path);
  if (suite) config.suite = *suite;
  if (seed) config.disorder.master_seed = *seed;
  suite_criteria(config.suite);
  validate(config);

  const fs::path dir(out);
  const fs::path raw = dir / "raw";
  std::error_code ec;
  fs::create_directories(raw, ec);
  if (ec) throw IoError("cannot create " + raw.string() + ": " + ec.message());

  SuiteContext ctx;
  ctx.exec = serial ? Exec::serial : Exec::parallel;
  ctx.raw_dir = raw;
  const RunReport report = run_suite(config, ctx);

  write_file(dir / "report.json", report.body().dump(2) + "\n");
  write_file(dir / "timing.json", nlohmann::json{{"seconds", report.seconds}}.dump() + "\n");
  write_file(raw / "config.json", to_json(config).dump(2) + "\n");
  write_file(raw / "checks.csv", checks_csv(report.checks));
  std::cout << render_text(report);
  std::cout << (report.all_passed() ? "all checks passed" : "some checks FAILED") << " (" << report.checks.size()
            << " checks, " << report.seconds << " s)\n";
  return report.all_passed() || !strict ? kOk : kFailed;
}

int report_command(const std::string& raw_dir) {
  const Rerender r = rerender(raw_dir);
  std::cout << render_text(r.report);
  for (const auto& m : r.mismatches) std::cout << "mismatch: " << m << "\n";
  std::cout << (r.mismatches.empty() ? "stored run reproduced" : "stored run NOT reproduced") << "\n";
  return r.mismatches.empty() ? kOk : kValidation;
}

int validate_command(const std::string& config_path) {
  const ExperimentConfig c = load_config(config_path);
  suite_criteria(c.suite);
  std::cout << "config ok: suite " << c.suite << "\n";
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume propagator and Liouville laboratory"};
  app.require_subcommand(1);

  std::string config_path, raw_dir, out = "liouvlab-out";
  std::optional<std::string> suite;
  std::optional<std::uint64_t> seed;
  bool strict = false, serial = false;

  auto* run = app.add_subcommand("run", "run a suite and write report.json plus raw data");
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("--suite", suite, "suite: smoke, propagator, algebra, liouville, birkhoff, acceptance");
  run->add_option("--seed", seed, "master seed override");
  run->add_flag("--strict", strict, "exit 3 if any check fails");
  run->add_option("--out", out, "output directory");
  run->add_flag("--serial", serial, "use the serial reference path");

  auto* rep = app.add_subcommand("report", "re-evaluate a stored raw directory");
  rep->add_option("raw-dir", raw_dir, "the raw/ directory of a run")->required();

  auto* val = app.add_subcommand("validate", "check a config without running");
  val->add_option("config", config_path, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return run_command(config_path, suite, seed, strict, out, serial);
    if (*rep) return report_command(raw_dir);
    if (*val) return validate_command(config_path);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const InputError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
