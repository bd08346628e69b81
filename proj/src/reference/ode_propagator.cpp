#include "liouvlab/reference/ode_propagator.hpp"

#include <complex>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace liouvlab::reference {

CMatrix ode_propagator(const TimeDependentHamiltonian& h, double t, double s, const OdeOptions& options) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<Complex>;
  const int n = h.dim();
  if (t == s) return CMatrix::Identity(n, n);

  State x(static_cast<std::size_t>(n) * n, Complex(0.0));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * n + i] = 1.0;

  auto rhs = [&](const State& u, State& du, double r) {
    Eigen::Map<const CMatrix> um(u.data(), n, n);
    Eigen::Map<CMatrix> dm(du.data(), n, n);
    dm.noalias() = Complex(0.0, -1.0) * (h.matrix(r) * um);
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(options.abs_tol, options.rel_tol);
  const double dt0 = t > s ? options.initial_step : -options.initial_step;
  odeint::integrate_adaptive(stepper, rhs, x, s, t, dt0);
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

} // namespace liouvlab::reference
