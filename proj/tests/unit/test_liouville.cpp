#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "liouvlab/liouville.hpp"
#include "liouvlab/quadrature.hpp"
#include "liouvlab/reference/ode_propagator.hpp"

using namespace liouvlab;
using testutil::chain;
using testutil::chain_dynamics;
using testutil::max_abs;
using testutil::random_ensemble;

namespace {

using Settings = EnsembleDynamics::Settings;

EquilibriumSpec fermi(double e_f, double beta = std::numeric_limits<double>::infinity()) {
  EquilibriumSpec s;
  s.fermi_energy = e_f;
  s.beta = beta;
  return s;
}

double max_diff(const CovariantEnsemble& a, const CovariantEnsemble& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, max_abs(a[i] - b[i]));
  return d;
}

RVector sorted_eigenvalues(const CMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

} // namespace

TEST_CASE("equilibrium state examples") {
  const auto dyn = chain_dynamics(8, 0.1, 3, Settings{-1.0, 0.0, 0});
  for (std::size_t i = 0; i < 3; ++i) {
    const auto empty = equilibrium_state(fermi(0.0), dyn);
    const auto full = equilibrium_state(fermi(100.0), dyn);
    CHECK(max_abs(empty[i]) == 0.0);
    CHECK(max_abs(full[i] - CMatrix::Identity(8, 8)) < 1e-13);
  }
  CMatrix one(1, 1);
  one(0, 0) = 3.7;
  CHECK(fermi_function(fermi(3.7, 2.0), HermitianOperator(one))(0, 0).real() == doctest::Approx(0.5));
  CHECK(fermi_function(fermi(3.7), HermitianOperator(one))(0, 0).real() == 1.0);
  CHECK_THROWS_AS(fermi(1.0, 0.0).validate(), InputError);
}

TEST_CASE("equilibrium state is a projection at zero temperature and bounded otherwise") {
  const auto dyn = chain_dynamics(12, 0.1, 4, Settings{-1.0, 0.0, 0});
  const auto p = equilibrium_state(fermi(5.5), dyn);
  const auto f = equilibrium_state(fermi(5.5, 3.0), dyn);
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    CHECK(max_abs(p[i] * p[i] - p[i]) < 1e-12);
    CHECK(hermiticity_defect(f[i]) < 1e-12);
    const RVector ev = sorted_eigenvalues(f[i]);
    CHECK(ev.minCoeff() >= -1e-12);
    CHECK(ev.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("gauge-transformed state") {
  const auto dyn = chain_dynamics(8, 0.1, 3, Settings{-1.0, 0.0, 0});
  const auto z = equilibrium_state(fermi(5.5), dyn);
  CHECK(max_diff(zeta_t(dyn, z, -60.0), z) < 1e-15);
  const auto z0 = zeta_t(dyn, z, 0.0);
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    CHECK((sorted_eigenvalues(z0[i]) - sorted_eigenvalues(z[i])).cwiseAbs().maxCoeff() < 1e-12);
    const CMatrix direct = fermi_function(fermi(5.5), dyn.hamiltonian(i).at(0.0));
    CHECK(max_abs(z0[i] - direct) < 1e-10);
  }
}

TEST_CASE("position commutator and Q0 check") {
  const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-1.0, 0.0, 0});
  const auto id = CovariantEnsemble::identity(dyn.geometry_ptr(), dyn.seeds());
  CHECK(k2_norm(position_commutator(id, 0)) == 0.0);
  const auto zero = equilibrium_state(fermi(0.0), dyn);
  const Q0Check q = q0_check(dyn, zero, 0);
  CHECK(q.commutator_form == 0.0);
  CHECK(q.moment == 0.0);
}

TEST_CASE("fourth moment is stable in L in the dimerized gap") {
  DisorderModel m;
  m.v_plus_max = 0.2;
  m.dimerization = 0.6;
  auto moment = [&](int length) {
    const EnsembleDynamics dyn(chain(length), m, testutil::field1(0.1), 3, 8, Settings{-1.0, 0.0, 0});
    // band centre 2/a^2 + gamma plus the mean potential
    return q0_check(dyn, equilibrium_state(fermi(5.1), dyn), 0).moment;
  };
  const double m16 = moment(16), m32 = moment(32);
  CHECK(m16 > 0.0);
  CHECK(std::abs(m32 - m16) <= 0.1 * m16);
}

TEST_CASE("Duhamel solution") {
  SUBCASE("zero field is a fixed point") {
    const auto dyn = chain_dynamics(8, 0.0, 2, Settings{-8.0, 0.0, 32});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const DuhamelResult r = duhamel_rho(dyn, z, {-3.0, 0.0});
    for (const auto& rho : r.rho) CHECK(max_diff(rho, z) <= 1e-12);
    CHECK(r.truncation_bound == 0.0);
  }
  SUBCASE("hermitian, trace preserving and within the switching bound") {
    const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-16.0, 0.0, 32});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    DuhamelOptions opt;
    opt.t_min = -16.0;
    const DuhamelResult r = duhamel_rho(dyn, z, {-8.0, -6.0, -4.0, 0.0}, opt);
    const double c = k2_norm(field_commutator(z, dyn.profile().field()));
    for (std::size_t q = 0; q < r.times.size(); ++q) {
      for (std::size_t i = 0; i < dyn.size(); ++i) CHECK(hermiticity_defect(r.rho[q][i]) <= 1e-10);
      CHECK(std::abs(tuv(r.rho[q]).mean - tuv(z).mean) <= 1e-10);
      if (r.times[q] <= -4.0)
        CHECK(k2_norm(r.rho[q] - zeta_t(dyn, z, r.times[q])) <= std::exp(r.times[q]) * c * (1 + 1e-6));
    }
    CHECK(r.truncation_bound == doctest::Approx(std::exp(-16.0) * c));
    CHECK_FALSE(r.warning);
  }
  SUBCASE("shallow t_min raises the warning flag") {
    const auto dyn = chain_dynamics(8, 0.1, 1, Settings{-2.0, 0.0, 16});
    DuhamelOptions opt;
    opt.t_min = -2.0;
    const DuhamelResult r = duhamel_rho(dyn, equilibrium_state(fermi(5.5), dyn), {0.0}, opt);
    CHECK(r.warning);
    CHECK_FALSE(r.message.empty());
  }
}

TEST_CASE("Duhamel solution equals the evolved initial state") {
  // rho(t) with lower limit s is U(t,s)(zeta(s)) exactly; U from the ODE oracle
  const double s = -8.0, t = 0.0;
  const auto dyn = chain_dynamics(8, 0.1, 2, Settings{s, t, 200});
  const auto z = equilibrium_state(fermi(5.5), dyn);
  DuhamelOptions opt;
  opt.t_min = s;
  opt.extrapolate_k = true;
  const DuhamelResult r = duhamel_rho(dyn, z, {t}, opt);
  const auto zs = zeta_t(dyn, z, s);
  std::vector<CMatrix> evolved;
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    const CMatrix u = reference::ode_propagator(dyn.hamiltonian(i), t, s);
    evolved.push_back(u * zs[i] * u.adjoint());
  }
  CHECK(k2_norm(r.rho[0] - dyn.wrap(evolved)) <= 1e-5);
}

TEST_CASE("limit representation") {
  SUBCASE("zero field") {
    const auto dyn = chain_dynamics(8, 0.0, 2, Settings{-8.0, 0.0, 16});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const LimitResult l = limit_rho(dyn, z, 0.0, {-2.0, -4.0});
    for (const auto& u : l.u_zeta) CHECK(max_diff(u, z) < 1e-12);
  }
  SUBCASE("geometric gaps") {
    const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-8.0, 0.0, 32});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const LimitResult l = limit_rho(dyn, z, 0.0, {-2.0, -4.0, -6.0, -8.0});
    REQUIRE(l.gap_ratios.size() == 2);
    CHECK(std::abs(l.gap_ratios.back() / std::exp(-2.0) - 1.0) <= 0.3);
    CHECK_FALSE(l.diverging);
    for (std::size_t i = 1; i < l.cross.size(); ++i) CHECK(l.cross[i] < l.cross[i - 1]);
    CHECK_THROWS_AS(limit_rho(dyn, z, 0.0, {-4.0, -2.0}), InputError);
  }
}

TEST_CASE("Liouville forms") {
  const auto dyn0 = chain_dynamics(8, 0.0, 2, Settings{-1.0, 0.0, 0});
  const auto id = CovariantEnsemble::identity(dyn0.geometry_ptr(), dyn0.seeds());
  CHECK(std::abs(form_L(dyn0, id, id, 0.0).l) < 1e-12);

  const auto dyn = chain_dynamics(8, 0.1, 4, Settings{-1.0, 0.0, 0});
  const auto z = equilibrium_state(fermi(5.5), dyn);
  const auto a = random_ensemble(dyn, 3);
  const auto b = random_ensemble(dyn, 30);
  for (double t : {-0.8, 0.0}) {
    const auto zt = zeta_t(dyn, z, t);
    const double scale = k2_norm(apply_HL_sqrt(dyn, a, t)) * k2_norm(apply_HL_sqrt(dyn, zt, t));
    CHECK(std::abs(form_L(dyn, a, zt, t).l) <= 1e-8 * scale);
    const Complex l = form_L(dyn, a, b, t).l;
    CHECK(std::abs(l - form_commutator(dyn, a, b, t)) <= 1e-10 * std::abs(l));
  }
  const auto h = random_ensemble(dyn, 7, true);
  CHECK(std::abs(form_L(dyn, h, h, 0.0).l.imag()) < 1e-10);
}

TEST_CASE("test dictionary") {
  const auto dyn = chain_dynamics(16, 0.1, 2, Settings{-1.0, 0.0, 0});
  const auto dict = test_dictionary(dyn);
  CHECK(dict.size() == 5);
  for (const auto& e : dict) {
    CHECK(k2_norm(e.a) > 0.0);
    CHECK(max_diff(dagger(e.a), e.a) < 1e-12);
  }
  CHECK(bump(0.0, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(bump(1.0, 0.0, 1.0) == 0.0);
  CHECK(bump(-3.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("Liouville residual") {
  SUBCASE("zero field") {
    const auto dyn = chain_dynamics(8, 0.0, 1, Settings{-8.0, 0.1, 64});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const auto dict = test_dictionary(dyn);
    const LiouvilleStudy s = liouville_residuals(dyn, z, {dict[0].a, dict[2].a}, 0.0, {1e-2, 5e-3});
    for (const auto& row : s.residual)
      for (double v : row) CHECK(v <= 1e-12);
  }
  SUBCASE("second order in h before the floor") {
    const auto dyn = chain_dynamics(8, 0.1, 1, Settings{-8.0, 0.05, 0});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const auto dict = test_dictionary(dyn);
    DuhamelOptions opt;
    opt.k = 400;
    opt.extrapolate_k = true;
    const LiouvilleStudy s = liouville_residuals(dyn, z, {dict[2].a}, 0.0, {4e-2, 2e-2, 1e-2}, opt);
    const auto& r = s.residual[0];
    CHECK(r[0] / r[1] == doctest::Approx(4.0).epsilon(0.2));
    CHECK(r[1] / r[2] == doctest::Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("initial condition at early times") {
  const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-16.0, 0.0, 32});
  const auto z = equilibrium_state(fermi(5.5), dyn);
  const auto a = test_dictionary(dyn)[4].a;
  DuhamelOptions opt;
  opt.t_min = -16.0;
  const std::vector<double> ts{-10.0, -8.0, -6.0, -4.0};
  const DuhamelResult r = duhamel_rho(dyn, z, ts, opt);
  const double c = k2_norm(a) * (k2_norm(field_commutator(z, dyn.profile().field())) +
                                 k2_norm(zeta_t(dyn, z, -4.0) - z) * std::exp(4.0));
  for (std::size_t q = 0; q < ts.size(); ++q)
    CHECK(std::abs(k2_inner(a, r.rho[q]) - k2_inner(a, z)) <= c * std::exp(ts[q]));
}

TEST_CASE("propagation derivative residuals") {
  SUBCASE("zero field at t = r") {
    const auto dyn = chain_dynamics(8, 0.0, 2, Settings{-1.0, 0.0, 64});
    const auto z = equilibrium_state(fermi(5.5), dyn);
    const auto a = test_dictionary(dyn)[0].a;
    CHECK(propagation_derivative_residual_t(dyn, a, z, -0.5, -0.5, 1.0 / 64) <= 1e-12);
  }
  SUBCASE("slope and sign") {
    const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-0.5, 0.0, 16000});
    const auto dict = test_dictionary(dyn);
    const auto& a = dict[2].a;
    const auto& b = dict[2].a;
    // above the O(1/k) floor of the frozen-generator product
    const std::vector<double> hs{8e-2, 4e-2, 2e-2};
    std::vector<double> rt, rr;
    for (double h : hs) {
      rt.push_back(propagation_derivative_residual_t(dyn, a, b, -0.2, -0.4, h));
      rr.push_back(propagation_derivative_residual_r(dyn, a, b, -0.2, -0.4, h));
    }
    CHECK(loglog_slope(hs, rt) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(loglog_slope(hs, rr) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(propagation_derivative_residual_r(dyn, a, b, -0.2, -0.4, hs.back(), -1.0) >= 10.0 * rr.back());
  }
}

TEST_CASE("uniqueness surrogate") {
  const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-2.0, 0.0, 64});
  const auto a = random_ensemble(dyn, 1);
  const auto b = random_ensemble(dyn, 2);
  const UniquenessCheck u = uniqueness_check(dyn, a, b, -2.0, {-1.5, -1.0, -0.5, 0.0});
  CHECK(u.zero_evolution == 0.0);
  CHECK(u.constancy <= 1e-8 * u.scale);
}

TEST_CASE("evolved state keeps its spectrum") {
  const auto dyn = chain_dynamics(8, 0.1, 2, Settings{-2.0, 0.0, 64});
  const auto z = equilibrium_state(fermi(5.5, 2.0), dyn);
  const auto uz = superpropagator(dyn, 0.0, -2.0, z);
  for (std::size_t i = 0; i < dyn.size(); ++i)
    CHECK((sorted_eigenvalues(uz[i]) - sorted_eigenvalues(z[i])).cwiseAbs().maxCoeff() <= 1e-10);
}
