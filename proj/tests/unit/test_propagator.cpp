#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "liouvlab/propagator.hpp"
#include "liouvlab/quadrature.hpp"
#include "liouvlab/reference/ode_propagator.hpp"
#include "liouvlab/reference/oracles.hpp"

using namespace liouvlab;
using testutil::chain_hamiltonian;
using testutil::max_abs;

namespace {

PropagatorFn ode(const TimeDependentHamiltonian& h) {
  return [&h](double t, double s) { return reference::ode_propagator(h, t, s); };
}

CMatrix static_evolution(const TimeDependentHamiltonian& h, double t, double s) {
  return reference::expm_pade(h.static_matrix(), t - s);
}

} // namespace

TEST_CASE("U_k axioms: identity, unitarity, grid composition, adjoint") {
  const auto h = chain_hamiltonian(8, 0.1);
  const UkGrid grid{-2.0, 16};
  CHECK(max_abs(uk_product(h, grid, -0.7, -0.7) - CMatrix::Identity(8, 8)) == 0.0);
  const CMatrix u = uk_product(h, grid, 0.0, -2.0);
  CHECK(unitarity_defect(u) <= 1e-10);
  const double r = grid.point(13);
  CHECK(operator_norm(uk_product(h, grid, -0.13, r) * uk_product(h, grid, r, -1.71) - uk_product(h, grid, -0.13, -1.71)) <=
        1e-12);
  CHECK(operator_norm(uk_product(h, grid, -1.3, -0.2) - uk_product(h, grid, -0.2, -1.3).adjoint()) <= 1e-12);
}

TEST_CASE("zero field: U_k is the static exponential for every k") {
  const auto h = chain_hamiltonian(8, 0.0);
  for (int k : {1, 4, 16}) {
    const PropagatorResult r = build_uk(h, -2.0, 0.0, -1.5, k);
    CHECK(operator_norm(r.u - static_evolution(h, 0.0, -1.5)) < 1e-12);
  }
}

TEST_CASE("U_k converges to the ODE oracle at first order in 1/k") {
  const auto h = chain_hamiltonian(16, 0.1);
  const CMatrix ref = reference::ode_propagator(h, 0.0, -2.0);
  std::vector<double> ks, err;
  for (int k : {4, 8, 16, 32}) {
    ks.push_back(k);
    err.push_back(operator_norm(build_uk(h, -2.0, 0.0, -2.0, k).u - ref));
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < err[i - 1]);
  CHECK(loglog_slope(ks, err) == doctest::Approx(-1.0).epsilon(0.2));
}

TEST_CASE("converge_propagator") {
  SUBCASE("zero field returns at the first check") {
    const auto h = chain_hamiltonian(16, 0.0);
    const PropagatorResult r = converge_propagator(h, -2.0, 0.0, -2.0, 1e-6);
    CHECK(r.converged);
    CHECK(r.gap_history.size() == 1);
  }
  SUBCASE("gap history decreases and two schedules agree") {
    const auto h = chain_hamiltonian(16, 0.1);
    const PropagatorResult a = converge_propagator(h, -0.5, 0.0, -0.5, 1e-6, 4, 1 << 16);
    const PropagatorResult b = converge_propagator(h, -0.5, 0.0, -0.5, 1e-6, 6, 1 << 16);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (std::size_t i = 1; i < a.gap_history.size(); ++i) CHECK(a.gap_history[i] < a.gap_history[i - 1]);
    CHECK(operator_norm(a.u - b.u) <= 2e-6);
    CHECK(operator_norm(a.u - reference::ode_propagator(h, 0.0, -0.5)) <= 2e-6);
  }
  SUBCASE("cap exceeded is reported, not fatal") {
    const auto h = chain_hamiltonian(8, 0.1);
    const PropagatorResult r = converge_propagator(h, -2.0, 0.0, -2.0, 1e-12, 4, 64);
    CHECK_FALSE(r.converged);
    CHECK(r.k_history.back() <= 64);
    CHECK(r.gap_history.size() + 1 == r.k_history.size());
  }
}

TEST_CASE("composition of converged propagators within 3 tol") {
  const auto h = chain_hamiltonian(8, 0.1);
  const double tol = 1e-6;
  const CMatrix ts = converge_propagator(h, -1.0, -0.1, -0.9, tol).u;
  const CMatrix tr = converge_propagator(h, -1.0, -0.1, -0.433, tol).u;
  const CMatrix rs = converge_propagator(h, -1.0, -0.433, -0.9, tol).u;
  CHECK(operator_norm(tr * rs - ts) <= 3 * tol);
}

TEST_CASE("product propagator matches the explicit product") {
  const auto h = chain_hamiltonian(8, 0.1);
  const ProductPropagator p(h, -2.0, 0.0, 32, 8 * 8 * 16 * 4);
  const UkGrid grid{-2.0, 32};
  CHECK(operator_norm(p(-0.3, -1.55) - uk_product(h, grid, -0.3, -1.55)) < 1e-12);
  CHECK(operator_norm(p.from_start(0.0) - uk_product(h, grid, 0.0, -2.0)) < 1e-12);
  const std::vector<double> times{-1.9, -1.0, -0.37, 0.0};
  p.sweep(times, [&](std::size_t i, const CMatrix& u) { CHECK(operator_norm(u - p.from_start(times[i])) < 1e-12); });
}

TEST_CASE("joint continuity surrogate") {
  const auto h = chain_hamiltonian(8, 0.1);
  const UkGrid grid{-2.0, 64};
  double hmax = 0.0;
  for (double t = -2.0; t <= 0.0; t += 0.25) hmax = std::max(hmax, h.at(t).norm());
  for (double t : {-1.7, -0.9, -0.2})
    for (double d : {1e-4, 1e-3, 1e-2})
      CHECK(operator_norm(uk_product(h, grid, t + d, -2.0) - uk_product(h, grid, t, -2.0)) <= d * hmax * (1 + 1e-9));
}

TEST_CASE("Gamma operator") {
  const auto h = chain_hamiltonian(8, 0.1);
  CHECK(max_abs(gamma(h, -0.4, -0.4)) == 0.0);
  const auto h0 = chain_hamiltonian(8, 0.0);
  CHECK(max_abs(gamma(h0, -0.1, -1.3)) < 1e-13);
  CHECK_THROWS_AS(gamma_rate(h, 0.1, 0.1), InputError);

  const auto h2 = chain_hamiltonian(2, 0.3);
  CHECK(dunford_taylor_check(h2, -0.2, -0.9, 64) <= 1e-6);
  CHECK(dunford_taylor_check(h, -0.2, -0.6, 64) <= 1e-6);
  CHECK(dunford_taylor_check(h, -0.6, -0.6, 64) <= 1e-14);
  CHECK(dunford_taylor_check(h0, -0.2, -0.6, 64) <= 1e-14);
}

TEST_CASE("one-sided Gamma limits") {
  const auto h0 = chain_hamiltonian(8, 0.0);
  const GammaLimit z = gamma_limit_pair(h0, -0.5, {1e-2, 5e-3});
  CHECK(max_abs(z.gamma1) < 1e-10);
  CHECK(max_abs(z.gamma2) < 1e-10);

  const auto h = chain_hamiltonian(8, 0.1);
  const std::vector<double> hs{1e-2, 5e-3, 2.5e-3, 1e-3};
  const GammaLimit g = gamma_limit_pair(h, -0.5, hs);
  CHECK(loglog_slope(hs, g.raw_residual) >= 0.9);
  CHECK(g.raw_residual.back() <= 0.15 * g.raw_residual.front());
  CHECK(operator_norm(g.gamma1 - gamma1_quadrature(h, -0.5, 64)) <= 1e-5);
  CHECK(operator_norm(g.gamma2 - gamma2_closed_form(h, -0.5)) <= 1e-5);
}

TEST_CASE("M_I estimate") {
  const auto h0 = chain_hamiltonian(8, 0.0);
  CHECK(estimate_MI(h0, -1.0, 0.0, 16) < 1e-12);
  const auto h = chain_hamiltonian(8, 0.1);
  const double m16 = estimate_MI(h, -1.0, 0.0, 16);
  const double m32 = estimate_MI(h, -1.0, 0.0, 32);
  const double m64 = estimate_MI(h, -1.0, 0.0, 64);
  CHECK(m32 >= m16);
  CHECK(m64 >= m32);
  CHECK(std::abs(m64 - m32) <= 0.05 * m64);
  for (const auto& [t, s] : uniform_pairs(-1.0, 0.0, 7))
    CHECK(operator_norm(gamma(h, t, s)) / std::abs(t - s) <= 1.1 * m64);
}

TEST_CASE("W_k and its bound") {
  const auto h = chain_hamiltonian(8, 0.1);
  const UkGrid grid{-1.0, 16};
  CHECK(operator_norm(w_k(h, grid, -0.5, -0.5) - CMatrix::Identity(8, 8)) < 1e-12);
  const auto h0 = chain_hamiltonian(8, 0.0);
  CHECK(operator_norm(w_k(h0, grid, 0.0, -1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  const double m = estimate_MI(h, -1.0, 0.0, 32);
  for (const auto& [t, s] : uniform_pairs(-1.0, 0.0, 5)) {
    const WkBound b = w_k_bound_check(h, grid, t, s, m);
    CHECK(b.holds);
    CHECK(b.norm <= b.bound);
  }
}

TEST_CASE("Dyson terms") {
  const auto h0 = chain_hamiltonian(8, 0.0);
  const auto terms0 = dyson_terms(h0, ode(h0), 0.0, -0.4, 3, 12);
  for (std::size_t j = 1; j < terms0.size(); ++j) CHECK(max_abs(terms0[j]) < 1e-12);

  const auto h = chain_hamiltonian(8, 0.1);
  std::vector<double> len, w1;
  for (double d : {0.1, 0.05, 0.025}) {
    len.push_back(d);
    w1.push_back(operator_norm(dyson_terms(h, ode(h), -0.3, -0.3 - d, 1, 12)[1]));
  }
  CHECK(loglog_slope(len, w1) == doctest::Approx(1.0).epsilon(0.1));

  const double t = -0.1, s = -0.6;
  const CMatrix u = reference::ode_propagator(h, t, s);
  const CMatrix direct = h.at(t).sqrt() * u * h.at(s).inv_sqrt();
  CHECK(operator_norm(dyson_series(h, ode(h), t, s, 6, 16) - direct) <= 1e-4);
}

TEST_CASE("C operator and its limit") {
  const auto h = chain_hamiltonian(8, 0.1);
  CHECK(max_abs(c_operator(h, -0.5, -0.5).definition) == 0.0);
  const COperator c = c_operator(h, -0.2, -0.7);
  CHECK(c.agreement <= 1e-10);
  CHECK(operator_norm(c.definition - c.field_difference) <= 1e-10);
  const auto h0 = chain_hamiltonian(8, 0.0);
  CHECK(max_abs(c_operator(h0, -0.2, -0.7).definition) < 1e-13);
  CHECK(operator_norm(c_limit(h, -0.5, {1e-2, 5e-3}) - c_closed_form(h, -0.5)) <= 1e-5);
}

TEST_CASE("weak derivative residuals") {
  const CVector phi = reference::random_vector(8, 1);
  const CVector psi = reference::random_vector(8, 2);
  const std::vector<double> hs{1e-2, 5e-3, 2.5e-3};

  SUBCASE("zero field: pure finite-difference error") {
    const auto h0 = chain_hamiltonian(8, 0.0);
    const PropagatorFn u = [&](double t, double s) { return static_evolution(h0, t, s); };
    std::vector<double> r;
    for (double step : hs) r.push_back(weak_derivative_residual_t(h0, u, -0.3, -1.0, phi, psi, step));
    CHECK(loglog_slope(hs, r) == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("t and s derivatives with the field on") {
    const auto h = chain_hamiltonian(8, 0.1);
    std::vector<double> rt, rs, wrong;
    for (double step : hs) {
      rt.push_back(weak_derivative_residual_t(h, ode(h), -0.3, -1.0, phi, psi, step));
      rs.push_back(weak_derivative_residual_s(h, ode(h), -0.3, -1.0, phi, psi, step));
      wrong.push_back(weak_derivative_residual_s(h, ode(h), -0.3, -1.0, phi, psi, step, -1.0));
    }
    CHECK(loglog_slope(hs, rt) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(loglog_slope(hs, rs) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(wrong.back() >= 10.0 * rs.back());
  }
}
