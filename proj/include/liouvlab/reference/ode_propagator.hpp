#pragma once

#include "liouvlab/propagator.hpp"

namespace liouvlab::reference {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-3;
};

/// U(t, s) from i dU/dt = H(t) U, U(s, s) = I, integrated with an adaptive
/// Runge-Kutta-Fehlberg 7(8) stepper on the full matrix. Runs backward for t < s.
CMatrix ode_propagator(const TimeDependentHamiltonian& h, double t, double s, const OdeOptions& options = {});

} // namespace liouvlab::reference
