#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "liouvlab/lattice.hpp"
#include "liouvlab/propagator.hpp"
#include "liouvlab/types.hpp"

namespace liouvlab {

/// How the cell average behind T and <<., .>> is taken.
///
/// single_cell uses one reference cell chi_0 (see LatticeGeometry::reference_cell).
/// all_cells replaces tr chi_0 X chi_0 by tr X / n_cells, i.e. the reference
/// cell averaged over all its translates. On a finite volume only the second
/// makes T exactly cyclic, so the trace identities hold to rounding.
enum class CellAveraging { single_cell, all_cells };

/// Finite family omega -> A_omega over seeded realizations.
class CovariantEnsemble {
public:
  CovariantEnsemble() = default;
  CovariantEnsemble(std::shared_ptr<const LatticeGeometry> geometry, std::vector<std::uint64_t> seeds,
                    std::vector<CMatrix> matrices, CellAveraging averaging = CellAveraging::all_cells);

  static CovariantEnsemble identity(std::shared_ptr<const LatticeGeometry> geometry, std::vector<std::uint64_t> seeds,
                                    CellAveraging averaging = CellAveraging::all_cells);

  std::size_t size() const { return matrices_.size(); }
  const LatticeGeometry& geometry() const { return *geometry_; }
  std::shared_ptr<const LatticeGeometry> geometry_ptr() const { return geometry_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  const std::vector<CMatrix>& matrices() const { return matrices_; }
  const CMatrix& operator[](std::size_t i) const { return matrices_[i]; }
  CMatrix& operator[](std::size_t i) { return matrices_[i]; }
  CellAveraging averaging() const { return averaging_; }
  CovariantEnsemble with_averaging(CellAveraging averaging) const;
  /// Same seeds and geometry, new matrices.
  CovariantEnsemble like(std::vector<CMatrix> matrices) const;

  /// Throws InputError unless seeds, geometry and averaging match.
  void check_compatible(const CovariantEnsemble& other, const char* who) const;

  CovariantEnsemble operator+(const CovariantEnsemble& other) const;
  CovariantEnsemble operator-(const CovariantEnsemble& other) const;
  CovariantEnsemble operator*(Complex c) const;

private:
  std::shared_ptr<const LatticeGeometry> geometry_;
  std::vector<std::uint64_t> seeds_;
  std::vector<CMatrix> matrices_;
  CellAveraging averaging_ = CellAveraging::all_cells;
};

/// Mean with its standard error over realizations (or cells).
struct Estimate {
  Complex mean{};
  double std_error = 0.0;
};

/// Per-realization "tr chi_0 X chi_0" under the ensemble's averaging mode.
Complex cell_trace(const LatticeGeometry& geometry, CellAveraging averaging, const CMatrix& x);

/// Per-realization tr chi_0 A* B chi_0 without forming the product.
Complex cell_inner(const LatticeGeometry& geometry, CellAveraging averaging, const CMatrix& a, const CMatrix& b);

/// <<A, B>> = E tr((A chi_0)* B chi_0).
Complex k2_inner(const CovariantEnsemble& a, const CovariantEnsemble& b, Exec exec = Exec::parallel);

struct Norms {
  double k1 = 0.0;
  double k2 = 0.0;
  double kinf = 0.0;
};
Norms norms(const CovariantEnsemble& a, Exec exec = Exec::parallel);
/// ||A||_2 alone (no singular values).
double k2_norm(const CovariantEnsemble& a, Exec exec = Exec::parallel);

/// T(A) = E tr chi_0 A chi_0.
Estimate tuv(const CovariantEnsemble& a, Exec exec = Exec::parallel);
/// |Lambda|^{-1} sum_a tr chi_a A chi_a for one realization (periodic mode);
/// the error is the standard error over cells.
Estimate tuv_volume(const LatticeGeometry& geometry, const CMatrix& a);

CovariantEnsemble odot_l(const CovariantEnsemble& b, const CovariantEnsemble& a);
CovariantEnsemble odot_r(const CovariantEnsemble& a, const CovariantEnsemble& b);
CovariantEnsemble dagger(const CovariantEnsemble& a);
CovariantEnsemble adjoint_each(const CovariantEnsemble& a);  ///< B -> B* per realization
CovariantEnsemble diamond(const CovariantEnsemble& a, const CovariantEnsemble& b);

struct DiamondResiduals {
  double inner = 0.0;    ///< |T(A <> B) - <<A^dagger, B>>|
  double swap = 0.0;     ///< |T(A <> B) - T(B <> A)|
  double module = 0.0;   ///< |T((C odot_L A) <> B) - T(A <> (B odot_R C))|
  double scale = 0.0;    ///< ||A||_2 ||B||_2 (times ||C||_inf for the third)
};
DiamondResiduals diamond_identities(const CovariantEnsemble& a, const CovariantEnsemble& b,
                                    const CovariantEnsemble& c);

/// Per-realization time-dependent Hamiltonians and product propagators on a
/// common interval. Realization i uses seed derive_seed(master, i).
class EnsembleDynamics {
public:
  struct Settings {
    double s0 = -2.0;
    double t1 = 0.0;
    int k = 256;  ///< 0 skips the propagators (static studies)
  };

  EnsembleDynamics(std::shared_ptr<const LatticeGeometry> geometry, const DisorderModel& model,
                   const FieldProfile& profile, std::uint64_t master_seed, int realizations, Settings settings,
                   Exec exec = Exec::parallel, CellAveraging averaging = CellAveraging::all_cells);

  std::size_t size() const { return hams_.size(); }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  std::shared_ptr<const LatticeGeometry> geometry_ptr() const { return geometry_; }
  const LatticeGeometry& geometry() const { return *geometry_; }
  const FieldProfile& profile() const { return profile_; }
  const Settings& settings() const { return settings_; }
  Exec exec() const { return exec_; }
  CellAveraging averaging() const { return averaging_; }
  const TimeDependentHamiltonian& hamiltonian(std::size_t i) const { return *hams_[i]; }
  bool has_propagators() const { return settings_.k > 0; }
  const ProductPropagator& propagator(std::size_t i) const;

  /// Ensemble wrapper around per-realization matrices.
  CovariantEnsemble wrap(std::vector<CMatrix> matrices) const;
  /// H_omega(t).
  CovariantEnsemble hamiltonians(double t) const;

private:
  std::shared_ptr<const LatticeGeometry> geometry_;
  FieldProfile profile_;
  Settings settings_;
  Exec exec_;
  CellAveraging averaging_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::unique_ptr<TimeDependentHamiltonian>> hams_;
  std::vector<std::unique_ptr<ProductPropagator>> props_;
};

/// U(t,s) (A) = U_omega(t,s) A_omega U_omega(s,t).
CovariantEnsemble superpropagator(const EnsembleDynamics& dyn, double t, double s, const CovariantEnsemble& a);

/// H_omega(t)^{1/2} A_omega.
CovariantEnsemble apply_HL_sqrt(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t);
/// (H_L^{1/2} A^dagger)^dagger = A_omega H_omega(t)^{1/2}.
CovariantEnsemble apply_HR_sqrt(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t);
/// (||H^{1/2} A||_2, ||H^{1/2} A^dagger||_2).
std::pair<double, double> q0_membership(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t);

/// G(t) A G(t)* per realization (open mode).
CovariantEnsemble gauge_transform(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t, bool inverse = false);

} // namespace liouvlab
