#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liouvlab/harness/config.hpp"
#include "liouvlab/harness/report.hpp"

namespace liouvlab::harness {

struct SuiteContext {
  Exec exec = Exec::parallel;
  /// When set, ensembles behind recomputable checks are written here.
  std::optional<std::filesystem::path> raw_dir;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;
  bool passed() const;
};

/// Titles of the acceptance criteria, index 1..13.
const std::vector<std::string>& criterion_titles();
CriterionResult run_criterion(int id, const ExperimentConfig& config, const SuiteContext& ctx);

/// Criteria run by a suite; "smoke" returns the fast identity subset.
std::vector<int> suite_criteria(const std::string& suite);
const std::vector<std::string>& suite_names();

RunReport run_suite(const ExperimentConfig& config, const SuiteContext& ctx);

} // namespace liouvlab::harness
