#include "liouvlab/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "liouvlab/covariant.hpp"
#include "liouvlab/harness/config.hpp"
#include "liouvlab/harness/container.hpp"
#include "liouvlab/spectral.hpp"

namespace liouvlab::harness {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double recompute_value(const std::filesystem::path& dir, const std::string& recipe) {
  const auto parts = split(recipe, ':');
  if (parts[0] == "k2_distance" && parts.size() == 3) {
    const CovariantEnsemble a = load_ensemble(dir / parts[1]);
    const CovariantEnsemble b = load_ensemble(dir / parts[2]);
    return k2_norm(a - b, Exec::serial);
  }
  if (parts[0] == "k2_norm" && parts.size() == 2) return k2_norm(load_ensemble(dir / parts[1]), Exec::serial);
  if (parts[0] == "hermiticity" && parts.size() == 2) {
    const CovariantEnsemble a = load_ensemble(dir / parts[1]);
    double worst = 0.0;
    for (const auto& m : a.matrices()) worst = std::max(worst, hermiticity_defect(m));
    return worst;
  }
  throw IntegrityError("unknown recomputation recipe '" + recipe + "'");
}

} // namespace

bool evaluate(const CheckRecord& c) {
  if (!std::isfinite(c.value)) return false;
  switch (c.comparison) {
    case Comparison::le: return c.value <= c.bound;
    case Comparison::ge: return c.value >= c.bound;
    case Comparison::within: return std::abs(c.value - c.target) <= c.bound;
  }
  return false;
}

CheckRecord make_check(std::string name, int criterion, double value, Comparison cmp, double bound, double target,
                       std::string recompute) {
  CheckRecord c;
  c.name = std::move(name);
  c.criterion = criterion;
  c.value = value;
  c.bound = bound;
  c.target = target;
  c.comparison = cmp;
  c.recompute = std::move(recompute);
  c.passed = evaluate(c);
  return c;
}

std::string comparison_name(Comparison c) {
  switch (c) {
    case Comparison::le: return "le";
    case Comparison::ge: return "ge";
    case Comparison::within: return "within";
  }
  return "le";
}

Comparison parse_comparison(const std::string& s) {
  if (s == "le") return Comparison::le;
  if (s == "ge") return Comparison::ge;
  if (s == "within") return Comparison::within;
  throw IntegrityError("unknown comparison '" + s + "'");
}

bool RunReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

nlohmann::json RunReport::body() const {
  nlohmann::json j;
  j["format"] = kReportFormat;
  j["suite"] = suite;
  j["config"] = config;
  nlohmann::json arr = nlohmann::json::array();
  std::size_t passed = 0;
  for (const auto& c : checks) {
    nlohmann::json r = {{"name", c.name},
                        {"criterion", c.criterion},
                        {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(fmt(c.value))},
                        {"bound", c.bound},
                        {"comparison", comparison_name(c.comparison)},
                        {"passed", c.passed}};
    if (c.comparison == Comparison::within) r["target"] = c.target;
    if (!c.recompute.empty()) r["recompute"] = c.recompute;
    arr.push_back(std::move(r));
    passed += c.passed ? 1 : 0;
  }
  j["checks"] = std::move(arr);
  j["notes"] = notes;
  j["summary"] = {{"total", checks.size()}, {"passed", passed}, {"failed", checks.size() - passed}};
  return j;
}

std::string render_text(const RunReport& r) {
  std::ostringstream out;
  for (const auto& c : r.checks) {
    out << (c.passed ? "PASS " : "FAIL ");
    if (c.criterion) out << "[" << c.criterion << "] ";
    out << c.name << "  value=" << fmt(c.value);
    switch (c.comparison) {
      case Comparison::le: out << " <= " << fmt(c.bound); break;
      case Comparison::ge: out << " >= " << fmt(c.bound); break;
      case Comparison::within: out << " within " << fmt(c.bound) << " of " << fmt(c.target); break;
    }
    out << "\n";
  }
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  return out.str();
}

std::string checks_csv(const std::vector<CheckRecord>& checks) {
  std::ostringstream out;
  out << "name,criterion,value,bound,target,comparison,passed,recompute\n";
  for (const auto& c : checks)
    out << c.name << "," << c.criterion << "," << fmt(c.value) << "," << fmt(c.bound) << "," << fmt(c.target) << ","
        << comparison_name(c.comparison) << "," << (c.passed ? 1 : 0) << "," << c.recompute << "\n";
  return out.str();
}

std::vector<CheckRecord> parse_checks_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "name,criterion,value,bound,target,comparison,passed,recompute")
    throw IntegrityError("checks.csv: missing or unexpected header");
  std::vector<CheckRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw IntegrityError("checks.csv: malformed row '" + line + "'");
    CheckRecord c;
    try {
      c.name = f[0];
      c.criterion = std::stoi(f[1]);
      c.value = std::stod(f[2]);
      c.bound = std::stod(f[3]);
      c.target = std::stod(f[4]);
      c.comparison = parse_comparison(f[5]);
      c.passed = f[6] == "1";
      c.recompute = f[7];
    } catch (const std::logic_error&) {
      throw IntegrityError("checks.csv: unparsable row '" + line + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Rerender rerender(const std::filesystem::path& raw_dir) {
  if (!std::filesystem::is_directory(raw_dir)) throw IoError("not a directory: " + raw_dir.string());
  Rerender out;
  const auto stored = parse_checks_csv(read_file(raw_dir / "checks.csv"));
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(read_file(raw_dir / "config.json"));
  } catch (const nlohmann::json::parse_error&) {
    throw IntegrityError("config.json: malformed");
  }
  out.report.suite = config.value("suite", "");
  out.report.config = config;
  for (const auto& s : stored) {
    CheckRecord c = s;
    if (!c.recompute.empty()) {
      c.value = recompute_value(raw_dir, c.recompute);
      if (fmt(c.value) != fmt(s.value)) out.mismatches.push_back(c.name + ": value " + fmt(c.value) + " vs stored " + fmt(s.value));
    }
    c.passed = evaluate(c);
    if (c.passed != s.passed) out.mismatches.push_back(c.name + ": pass/fail flag differs from the stored run");
    out.report.checks.push_back(std::move(c));
  }
  return out;
}

} // namespace liouvlab::harness
