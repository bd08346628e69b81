#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "liouvlab/covariant.hpp"
#include "liouvlab/lattice.hpp"
#include "liouvlab/liouville.hpp"

namespace liouvlab::harness {

/// Invalid configuration; the message starts with the offending key path.
class ConfigError : public InputError {
public:
  using InputError::InputError;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GeometryConfig {
  std::vector<int> extent{16};
  double spacing = 1.0;
  Boundary boundary = Boundary::open;
  std::optional<std::vector<double>> origin;
};

struct DisorderConfig {
  double v_plus_max = 1.0;
  double v_minus_max = 0.0;
  double link_disorder = 0.0;
  double magnetic_field = 0.0;
  double dimerization = 0.0;
  int realizations = 8;
  std::uint64_t master_seed = 20240601;
};

struct FieldConfig {
  std::vector<double> e{0.1};
  double eta = 1.0;
};

struct PropagatorConfig {
  double s0 = -2.0;
  double t1 = 0.0;
  int k = 64;  ///< fixed k for ensemble propagators
  int k0 = 4;
  double tol = 8e-6;
  int cap = 1 << 14;
};

struct LiouvilleConfig {
  double beta = std::numeric_limits<double>::infinity();
  double fermi_energy = 5.5;
  double t_min = -8.0;
  int quadrature_order = 8;
  int k = 800;  ///< product-grid resolution for the Liouville residual study
  std::vector<double> times{-0.5, -0.25, 0.0};
  std::vector<double> fd_steps{4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
};

struct ExperimentConfig {
  std::string suite = "smoke";
  GeometryConfig geometry;
  DisorderConfig disorder;
  FieldConfig field;
  PropagatorConfig propagator;
  LiouvilleConfig liouville;

  LatticeGeometry make_geometry() const;
  DisorderModel make_model() const;
  FieldProfile make_profile() const;
  EquilibriumSpec make_equilibrium() const;
};

/// Parses and validates; unknown keys and out-of-range values raise ConfigError
/// naming the key path (e.g. "field.eta").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

/// Runs every range check (also called by parse_config).
void validate(const ExperimentConfig& c);

/// The reference configuration of the acceptance criteria.
ExperimentConfig reference_config();

} // namespace liouvlab::harness
