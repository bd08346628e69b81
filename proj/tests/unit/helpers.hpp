#pragma once

#include <memory>
#include <vector>

#include "liouvlab/covariant.hpp"
#include "liouvlab/lattice.hpp"
#include "liouvlab/propagator.hpp"
#include "liouvlab/reference/oracles.hpp"

namespace testutil {

using namespace liouvlab;

inline std::shared_ptr<const LatticeGeometry> chain(int length, Boundary boundary = Boundary::open) {
  return std::make_shared<const LatticeGeometry>(std::vector<int>{length}, boundary);
}

inline DisorderModel anderson(double v_plus_max = 1.0) {
  DisorderModel m;
  m.v_plus_max = v_plus_max;
  return m;
}

inline FieldProfile field1(double e, double eta = 1.0) {
  RVector f(1);
  f << e;
  return FieldProfile(f, eta);
}

inline TimeDependentHamiltonian chain_hamiltonian(int length, double e, std::uint64_t seed = 11,
                                                  double v_plus_max = 1.0) {
  auto g = *chain(length);
  return TimeDependentHamiltonian(g, sample_realization(g, anderson(v_plus_max), seed), field1(e));
}

inline EnsembleDynamics chain_dynamics(int length, double e, int realizations, EnsembleDynamics::Settings settings,
                                       Exec exec = Exec::parallel, std::uint64_t master = 20240601) {
  return EnsembleDynamics(chain(length), anderson(), field1(e), master, realizations, settings, exec);
}

/// Ensemble of random matrices over the dynamics' seeds.
inline CovariantEnsemble random_ensemble(const EnsembleDynamics& dyn, std::uint64_t seed, bool hermitian = false) {
  std::vector<CMatrix> m;
  const int n = dyn.geometry().num_sites();
  for (std::size_t i = 0; i < dyn.size(); ++i)
    m.push_back(hermitian ? reference::random_hermitian(n, seed + i) : reference::random_matrix(n, seed + i));
  return dyn.wrap(std::move(m));
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

} // namespace testutil
