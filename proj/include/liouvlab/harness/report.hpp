#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace liouvlab::harness {

inline constexpr const char* kReportFormat = "liouvlab-report/1";

enum class Comparison { le, ge, within };

/// One numeric check: value against bound (or |value - target| <= bound).
struct CheckRecord {
  std::string name;
  int criterion = 0;  ///< acceptance criterion served, 0 for auxiliary checks
  double value = 0.0;
  double bound = 0.0;
  double target = 0.0;
  Comparison comparison = Comparison::le;
  bool passed = false;
  /// Optional recomputation recipe against stored ensembles, e.g.
  /// "k2_distance:rho.lvl:limit.lvl" or "hermiticity:rho.lvl".
  std::string recompute;
};

bool evaluate(const CheckRecord& c);
CheckRecord make_check(std::string name, int criterion, double value, Comparison cmp, double bound,
                       double target = 0.0, std::string recompute = {});

struct RunReport {
  std::string suite;
  nlohmann::json config;
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;  ///< kept out of the report body so bodies compare byte for byte

  bool all_passed() const;
  nlohmann::json body() const;
};

std::string comparison_name(Comparison c);
Comparison parse_comparison(const std::string& s);

/// Plain-text table, one line per check.
std::string render_text(const RunReport& r);

/// CSV with name,criterion,value,bound,target,comparison,passed,recompute.
std::string checks_csv(const std::vector<CheckRecord>& checks);
std::vector<CheckRecord> parse_checks_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

struct Rerender {
  RunReport report;
  std::vector<std::string> mismatches;  ///< flags or values that did not reproduce
};

/// Reloads checks.csv and config.json from a raw directory, re-evaluates every
/// pass/fail flag and recomputes values with a recipe from the stored ensembles.
Rerender rerender(const std::filesystem::path& raw_dir);

} // namespace liouvlab::harness
