#include "liouvlab/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace liouvlab::harness {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError((path.empty() ? std::string("<root>") : path) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
  return v;
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T, class F>
void read(const json& obj, const std::string& path, const char* key, T& target, F&& conv) {
  if (obj.contains(key)) target = conv(obj.at(key), join(path, key));
}

} // namespace

LatticeGeometry ExperimentConfig::make_geometry() const {
  return LatticeGeometry(geometry.extent, geometry.boundary, geometry.spacing, geometry.origin);
}

DisorderModel ExperimentConfig::make_model() const {
  DisorderModel m;
  m.v_plus_max = disorder.v_plus_max;
  m.v_minus_max = disorder.v_minus_max;
  m.link_disorder = disorder.link_disorder;
  m.magnetic_field = disorder.magnetic_field;
  m.dimerization = disorder.dimerization;
  return m;
}

FieldProfile ExperimentConfig::make_profile() const {
  return FieldProfile(Eigen::Map<const RVector>(field.e.data(), static_cast<Eigen::Index>(field.e.size())),
                      field.eta);
}

EquilibriumSpec ExperimentConfig::make_equilibrium() const {
  EquilibriumSpec s;
  s.beta = liouville.beta;
  s.fermi_energy = liouville.fermi_energy;
  return s;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, "", {"suite", "geometry", "disorder", "field", "propagator", "liouville"});
  if (j.contains("suite")) {
    if (!j.at("suite").is_string()) throw ConfigError("suite: expected a string");
    c.suite = j.at("suite").get<std::string>();
  }
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    const std::string p = "geometry";
    reject_unknown(g, p, {"dimension", "extent", "spacing", "boundary", "origin"});
    if (g.contains("extent")) {
      const json& e = g.at("extent");
      if (!e.is_array()) throw ConfigError("geometry.extent: expected an array of integers");
      c.geometry.extent.clear();
      for (std::size_t i = 0; i < e.size(); ++i)
        c.geometry.extent.push_back(get_int(e[i], "geometry.extent[" + std::to_string(i) + "]"));
    }
    if (g.contains("dimension")) {
      const int d = get_int(g.at("dimension"), "geometry.dimension");
      if (d != static_cast<int>(c.geometry.extent.size()))
        throw ConfigError("geometry.dimension: does not match the length of geometry.extent");
    }
    read(g, p, "spacing", c.geometry.spacing, get_number);
    if (g.contains("boundary")) {
      const json& b = g.at("boundary");
      if (b == "open") c.geometry.boundary = Boundary::open;
      else if (b == "periodic") c.geometry.boundary = Boundary::periodic;
      else throw ConfigError("geometry.boundary: expected \"open\" or \"periodic\"");
    }
    if (g.contains("origin")) c.geometry.origin = get_numbers(g.at("origin"), "geometry.origin");
  }
  if (j.contains("disorder")) {
    const json& d = j.at("disorder");
    const std::string p = "disorder";
    reject_unknown(d, p,
                   {"v_plus_max", "v_minus_max", "link_disorder", "magnetic_field", "dimerization", "realizations",
                    "master_seed"});
    read(d, p, "v_plus_max", c.disorder.v_plus_max, get_number);
    read(d, p, "v_minus_max", c.disorder.v_minus_max, get_number);
    read(d, p, "link_disorder", c.disorder.link_disorder, get_number);
    read(d, p, "magnetic_field", c.disorder.magnetic_field, get_number);
    read(d, p, "dimerization", c.disorder.dimerization, get_number);
    read(d, p, "realizations", c.disorder.realizations, get_int);
    if (d.contains("master_seed")) {
      const json& s = d.at("master_seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw ConfigError("disorder.master_seed: expected a non-negative integer");
      c.disorder.master_seed = s.get<std::uint64_t>();
    }
  }
  if (j.contains("field")) {
    const json& f = j.at("field");
    reject_unknown(f, "field", {"E", "eta"});
    if (f.contains("E")) c.field.e = get_numbers(f.at("E"), "field.E");
    read(f, "field", "eta", c.field.eta, get_number);
  }
  if (j.contains("propagator")) {
    const json& pr = j.at("propagator");
    const std::string p = "propagator";
    reject_unknown(pr, p, {"s0", "t1", "k", "k0", "tol", "cap"});
    read(pr, p, "s0", c.propagator.s0, get_number);
    read(pr, p, "t1", c.propagator.t1, get_number);
    read(pr, p, "k", c.propagator.k, get_int);
    read(pr, p, "k0", c.propagator.k0, get_int);
    read(pr, p, "tol", c.propagator.tol, get_number);
    read(pr, p, "cap", c.propagator.cap, get_int);
  }
  if (j.contains("liouville")) {
    const json& l = j.at("liouville");
    const std::string p = "liouville";
    reject_unknown(l, p, {"beta", "fermi_energy", "t_min", "quadrature_order", "k", "times", "fd_steps"});
    if (l.contains("beta")) {
      const json& b = l.at("beta");
      if (b.is_string() && b.get<std::string>() == "inf") c.liouville.beta = std::numeric_limits<double>::infinity();
      else if (b.is_number()) c.liouville.beta = b.get<double>();
      else throw ConfigError("liouville.beta: expected a number or \"inf\"");
    }
    read(l, p, "fermi_energy", c.liouville.fermi_energy, get_number);
    read(l, p, "t_min", c.liouville.t_min, get_number);
    read(l, p, "quadrature_order", c.liouville.quadrature_order, get_int);
    read(l, p, "k", c.liouville.k, get_int);
    read(l, p, "times", c.liouville.times, get_numbers);
    read(l, p, "fd_steps", c.liouville.fd_steps, get_numbers);
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  if (g.extent.empty() || g.extent.size() > 3) throw ConfigError("geometry.extent: dimension must be 1, 2 or 3");
  for (std::size_t i = 0; i < g.extent.size(); ++i)
    if (g.extent[i] < 1) throw ConfigError("geometry.extent[" + std::to_string(i) + "]: must be >= 1");
  if (!(g.spacing > 0.0)) throw ConfigError("geometry.spacing: must be > 0");
  if (g.origin && g.origin->size() != g.extent.size())
    throw ConfigError("geometry.origin: length must equal the dimension");
  const auto& d = c.disorder;
  if (d.v_plus_max < 0.0) throw ConfigError("disorder.v_plus_max: must be >= 0");
  if (d.v_minus_max < 0.0) throw ConfigError("disorder.v_minus_max: must be >= 0");
  if (d.link_disorder < 0.0) throw ConfigError("disorder.link_disorder: must be >= 0");
  if (d.dimerization < 0.0 || d.dimerization >= 1.0) throw ConfigError("disorder.dimerization: must lie in [0, 1)");
  if (d.realizations < 1) throw ConfigError("disorder.realizations: must be >= 1");
  if (c.field.e.size() != g.extent.size()) throw ConfigError("field.E: length must equal the dimension");
  if (!(c.field.eta > 0.0)) throw ConfigError("field.eta: must be > 0");
  const auto& p = c.propagator;
  if (!(p.t1 > p.s0)) throw ConfigError("propagator.t1: must exceed propagator.s0");
  if (p.k < 1) throw ConfigError("propagator.k: must be >= 1");
  if (p.k0 < 1) throw ConfigError("propagator.k0: must be >= 1");
  if (!(p.tol > 0.0)) throw ConfigError("propagator.tol: must be > 0");
  if (p.cap < p.k0) throw ConfigError("propagator.cap: must be >= propagator.k0");
  const auto& l = c.liouville;
  if (!(l.beta > 0.0)) throw ConfigError("liouville.beta: must be > 0");
  if (!(l.t_min < 0.0)) throw ConfigError("liouville.t_min: must be < 0");
  if (l.quadrature_order < 2 || l.quadrature_order % 2 != 0)
    throw ConfigError("liouville.quadrature_order: must be even and >= 2");
  if (l.k < 1) throw ConfigError("liouville.k: must be >= 1");
  for (std::size_t i = 0; i < l.fd_steps.size(); ++i)
    if (!(l.fd_steps[i] > 0.0)) throw ConfigError("liouville.fd_steps[" + std::to_string(i) + "]: must be > 0");
  for (std::size_t i = 0; i < l.times.size(); ++i)
    if (l.times[i] < l.t_min) throw ConfigError("liouville.times[" + std::to_string(i) + "]: must be >= liouville.t_min");
  try {
    const LatticeGeometry geo = c.make_geometry();
    c.make_model().validate(geo);
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["suite"] = c.suite;
  j["geometry"] = {{"extent", c.geometry.extent},
                   {"spacing", c.geometry.spacing},
                   {"boundary", c.geometry.boundary == Boundary::open ? "open" : "periodic"}};
  if (c.geometry.origin) j["geometry"]["origin"] = *c.geometry.origin;
  j["disorder"] = {{"v_plus_max", c.disorder.v_plus_max},     {"v_minus_max", c.disorder.v_minus_max},
                   {"link_disorder", c.disorder.link_disorder}, {"magnetic_field", c.disorder.magnetic_field},
                   {"dimerization", c.disorder.dimerization},   {"realizations", c.disorder.realizations},
                   {"master_seed", c.disorder.master_seed}};
  j["field"] = {{"E", c.field.e}, {"eta", c.field.eta}};
  j["propagator"] = {{"s0", c.propagator.s0}, {"t1", c.propagator.t1},   {"k", c.propagator.k},
                     {"k0", c.propagator.k0}, {"tol", c.propagator.tol}, {"cap", c.propagator.cap}};
  json beta = std::isinf(c.liouville.beta) ? json("inf") : json(c.liouville.beta);
  j["liouville"] = {{"beta", beta},
                    {"fermi_energy", c.liouville.fermi_energy},
                    {"t_min", c.liouville.t_min},
                    {"quadrature_order", c.liouville.quadrature_order},
                    {"k", c.liouville.k},
                    {"times", c.liouville.times},
                    {"fd_steps", c.liouville.fd_steps}};
  return j;
}

ExperimentConfig reference_config() {
  ExperimentConfig c;
  c.suite = "acceptance";
  return c;
}

} // namespace liouvlab::harness
