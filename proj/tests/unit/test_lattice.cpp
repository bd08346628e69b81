#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "liouvlab/lattice.hpp"
#include "liouvlab/quadrature.hpp"
#include "liouvlab/reference/oracles.hpp"

using namespace liouvlab;
using testutil::max_abs;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

} // namespace

TEST_CASE("geometry numbering, cells and edges") {
  const LatticeGeometry g({4, 3}, Boundary::open);
  CHECK(g.num_sites() == 12);
  CHECK(g.edges().size() == 3 * 3 + 4 * 2);
  const std::vector<int> c{2, 1};
  CHECK(g.site(c) == 6);
  CHECK(g.coords(6) == c);
  CHECK(g.position(0, 0) == doctest::Approx(-1.5));
  CHECK(g.position(0, 1) == doctest::Approx(-1.0));

  const LatticeGeometry fine({8}, Boundary::open, 0.5);
  CHECK(fine.sites_per_cell() == 2);
  CHECK(fine.num_cells() == 4);
  std::set<int> covered;
  for (int cell = 0; cell < fine.num_cells(); ++cell)
    for (int s : fine.cell_sites(cell)) CHECK(covered.insert(s).second);
  CHECK(static_cast<int>(covered.size()) == fine.num_sites());

  const LatticeGeometry ring({5}, Boundary::periodic);
  CHECK(ring.edges().size() == 5);
  CHECK(ring.neighbor(4, 0).value() == 0);
  CHECK_THROWS_AS(LatticeGeometry({4}, Boundary::open, 0.3), InputError);
  CHECK_THROWS_AS(g.translate(0, c), UnsupportedOperation);
}

TEST_CASE("one-site Hamiltonian is the diagonal constant") {
  const LatticeGeometry g({1}, Boundary::open);
  DisorderModel m;
  const Realization r = sample_realization(g, m, 3);
  const HermitianOperator h = build_hamiltonian(g, r, vec({0.0}));
  REQUIRE(h.dim() == 1);
  CHECK(h.matrix()(0, 0).real() == doctest::Approx(2.0 + m.gamma(g)));
  CHECK(m.gamma(g) == doctest::Approx(3.0));
}

TEST_CASE("zero field shift equals the unshifted Hamiltonian") {
  const LatticeGeometry g({6, 2}, Boundary::open);
  DisorderModel m;
  m.v_plus_max = 1.0;
  m.link_disorder = 0.4;
  const Realization r = sample_realization(g, m, 5);
  CHECK(max_abs(build_hamiltonian(g, r, vec({0.0, 0.0})).matrix() - build_hamiltonian(g, r).matrix()) == 0.0);
}

TEST_CASE("open chain spectrum equals the path Laplacian shifted by gamma") {
  const LatticeGeometry g({4}, Boundary::open);
  DisorderModel m;
  const Realization r = sample_realization(g, m, 1);
  const HermitianOperator h = build_hamiltonian(g, r);
  const auto expected = reference::path_laplacian_eigenvalues(4);
  for (int k = 0; k < 4; ++k) {
    CHECK(expected[k] == doctest::Approx(2.0 - 2.0 * std::cos((k + 1) * std::numbers::pi / 5.0)));
    CHECK(h.eigenvalues()(k) == doctest::Approx(expected[k] + m.gamma(g)).epsilon(1e-13));
  }
}

TEST_CASE("spectrum offset: min eigenvalue >= 1") {
  DisorderModel m;
  m.v_plus_max = 2.0;
  m.v_minus_max = 1.5;
  m.link_disorder = 0.8;
  for (auto dims : {std::vector<int>{16}, std::vector<int>{5, 4}, std::vector<int>{3, 3, 3}}) {
    const LatticeGeometry g(dims, Boundary::open);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Realization r = sample_realization(g, m, seed);
      RVector f = RVector::Constant(g.dimension(), 0.7);
      CHECK(build_hamiltonian(g, r, f).min_eigenvalue() >= 1.0);
    }
  }
  DisorderModel mag;
  mag.magnetic_field = 2.0 * std::numbers::pi / 16.0;
  const LatticeGeometry torus({4, 4}, Boundary::periodic);
  CHECK(build_hamiltonian(torus, sample_realization(torus, mag, 2)).min_eigenvalue() >= 1.0);
}

TEST_CASE("rejected inputs") {
  const LatticeGeometry g({4}, Boundary::open);
  Realization r = sample_realization(g, DisorderModel{}, 1);
  CHECK_THROWS_AS(build_hamiltonian(g, r, vec({0.0, 0.0})), InputError);
  r.v_plus(2) = std::nan("");
  CHECK_THROWS_AS(build_hamiltonian(g, r), InputError);
  DisorderModel bad;
  bad.magnetic_field = 0.5;
  CHECK_THROWS_AS(sample_realization(g, bad, 1), InputError);
  CHECK_THROWS_AS(FieldProfile(vec({1.0}), 0.0), InputError);
}

TEST_CASE("seed derivation is deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(seen.insert(derive_seed(42, i)).second);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
  const LatticeGeometry g({8}, Boundary::open);
  const Realization a = sample_realization(g, testutil::anderson(), 99);
  const Realization b = sample_realization(g, testutil::anderson(), 99);
  CHECK(a.v_plus == b.v_plus);
  CHECK(a.v_plus.minCoeff() >= 0.0);
  CHECK(a.v_plus.maxCoeff() <= 1.0);
}

TEST_CASE("electric field examples") {
  const FieldProfile p(vec({2.0, 0.0}), 1.0);
  CHECK(p.electric_field(0.0)(0) == 2.0);
  CHECK(p.electric_field(5.0)(0) == 2.0);
  CHECK(p.electric_field(-1.0)(0) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(p.electric_field(-1.0)(1) == 0.0);
}

TEST_CASE("switching integral examples") {
  const FieldProfile p(vec({1.0, 0.0}), 2.0);
  CHECK(p.switching_integral(0.0)(0) == doctest::Approx(0.5));
  CHECK(p.switching_integral(0.0)(1) == 0.0);
  CHECK(p.switching_integral(-800.0).norm() == 0.0);
  const FieldProfile q(vec({1.0, 1.0}), 1.0);
  CHECK(q.switching_integral(3.0)(0) == doctest::Approx(4.0));
  CHECK(q.switching_integral(3.0)(1) == doctest::Approx(4.0));
}

TEST_CASE("switching integral derivative is the field, second order in h") {
  const FieldProfile p(vec({0.3}), 1.3);
  for (double t : {-2.0, -0.4, 1.5}) {
    std::vector<double> hs{1e-2, 5e-3, 2.5e-3}, err;
    for (double h : hs)
      err.push_back(std::abs((p.switching_integral(t + h)(0) - p.switching_integral(t - h)(0)) / (2 * h) -
                             p.electric_field(t)(0)));
    if (t > 0.0) {
      CHECK(err.back() < 1e-12);  // F is linear for t > 0
    } else {
      CHECK(loglog_slope(hs, err) == doctest::Approx(2.0).epsilon(0.1));
    }
  }
}

TEST_CASE("gauge unitary examples") {
  const LatticeGeometry g({8}, Boundary::open);
  const FieldProfile off(vec({0.0}), 1.0);
  CHECK(max_abs(CMatrix(gauge_unitary(g, off, 0.0).asDiagonal()) - CMatrix::Identity(8, 8)) == 0.0);

  const LatticeGeometry one({1}, Boundary::open);
  CHECK(gauge_unitary(one, FieldProfile(vec({0.4}), 1.0), 0.0)(0) == Complex(1.0, 0.0));

  const LatticeGeometry pair({2}, Boundary::open, 1.0, std::vector<double>{0.0});
  const CVector gph = gauge_unitary(pair, FieldProfile(vec({std::numbers::pi}), 1.0), 0.0);
  CHECK(std::abs(gph(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(gph(1) - Complex(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("gauge identity is exact on the Peierls lattice") {
  const LatticeGeometry g({8}, Boundary::open);
  DisorderModel m;
  m.v_plus_max = 1.0;
  m.link_disorder = 0.5;
  const FieldProfile p(vec({0.37}), 0.8);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Realization r = sample_realization(g, m, seed);
    const double hn = build_hamiltonian(g, r).norm();
    for (double t : {-50.0, -3.0, -0.5, 0.0, 2.5}) CHECK(gauge_identity_residual(g, r, p, t) <= 1e-12 * hn);
    CHECK(gauge_identity_residual(g, r, FieldProfile(vec({0.0}), 1.0), 1.0) == 0.0);
  }
  const LatticeGeometry g2({4, 3}, Boundary::open);
  const Realization r2 = sample_realization(g2, m, 7);
  const FieldProfile p2(vec({0.2, -0.3}), 1.0);
  CHECK(gauge_identity_residual(g2, r2, p2, 0.7) <= 1e-12 * build_hamiltonian(g2, r2).norm());
  const LatticeGeometry ring({8}, Boundary::periodic);
  CHECK_THROWS_AS(gauge_identity_residual(ring, sample_realization(ring, m, 1), p, 0.0), UnsupportedOperation);
}

TEST_CASE("magnetic translations and covariance") {
  const LatticeGeometry ring({8}, Boundary::periodic);
  const Realization r = sample_realization(ring, testutil::anderson(), 12);
  const double hn = build_hamiltonian(ring, r).norm();

  const std::vector<int> zero{0};
  CHECK(max_abs(magnetic_translation(ring, r.background_phase, zero) - CMatrix::Identity(8, 8)) == 0.0);
  CHECK(covariance_residual(ring, r, zero) == 0.0);

  const Realization flat = sample_realization(ring, testutil::anderson(0.0), 12);
  for (int a = 1; a < 8; ++a) CHECK(covariance_residual(ring, flat, std::vector<int>{a}) == 0.0);

  // tau(3) omega built by hand: V'(x) = V(x - 3 mod 8).
  const std::vector<int> three{3};
  const Realization shifted = r.translated(ring, three);
  for (int x = 0; x < 8; ++x) CHECK(shifted.v_plus(x) == r.v_plus((x + 5) % 8));
  const CMatrix u = magnetic_translation(ring, r.background_phase, three);
  const CMatrix lhs = u * build_hamiltonian(ring, r).matrix() * u.adjoint();
  CHECK(operator_norm(lhs - build_hamiltonian(ring, shifted).matrix()) <= 1e-12 * hn);
  CHECK(covariance_residual(ring, r, three) <= 1e-12 * hn);

  // four flux quanta on the 4x4 torus: every shift is gauge equivalent
  DisorderModel mag;
  mag.v_plus_max = 1.0;
  mag.magnetic_field = 2.0 * std::numbers::pi * 4.0 / 16.0;
  const LatticeGeometry torus({4, 4}, Boundary::periodic);
  const Realization rm = sample_realization(torus, mag, 4);
  for (auto shift : {std::vector<int>{1, 0}, std::vector<int>{0, 1}, std::vector<int>{2, 3}})
    CHECK(covariance_residual(torus, rm, shift) <= 1e-12 * build_hamiltonian(torus, rm).norm());

  // one flux quantum: a unit shift changes the holonomies
  DisorderModel one = mag;
  one.magnetic_field = 2.0 * std::numbers::pi / 16.0;
  CHECK_THROWS_AS(covariance_residual(torus, sample_realization(torus, one, 4), std::vector<int>{0, 1}),
                  UnsupportedOperation);

  CHECK_THROWS_AS(magnetic_translation(LatticeGeometry({8}, Boundary::open), r.background_phase, three),
                  UnsupportedOperation);
}

TEST_CASE("form bound examples") {
  const LatticeGeometry g({8}, Boundary::open);
  const Realization r0 = sample_realization(g, DisorderModel{}, 1);
  CHECK(verify_form_bound(g, r0, 0.0, 0.0));

  Realization rc = r0;
  rc.v_minus = RVector::Constant(8, 0.3);
  CHECK(verify_form_bound(g, rc, 0.0, 0.3));
  CHECK_FALSE(verify_form_bound(g, rc, 0.0, 0.29));

  DisorderModel m;
  m.v_minus_max = 0.5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(verify_form_bound(g, sample_realization(g, m, seed), 0.0, 0.5));
  CHECK_THROWS_AS(verify_form_bound(g, r0, 1.0, 0.0), InputError);
}

TEST_CASE("cell statistics are translation invariant over seeds") {
  // mean of tr chi_a f(H) chi_a over 200 seeds, two disjoint cells
  const LatticeGeometry ring({16}, Boundary::periodic);
  const DisorderModel m = testutil::anderson();
  std::vector<double> c0, c5;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const HermitianOperator h = build_hamiltonian(ring, sample_realization(ring, m, derive_seed(5, i)));
    const CMatrix f = h.apply([](double x) { return Complex(std::exp(-0.5 * (x - 5.5) * (x - 5.5)), 0.0); });
    c0.push_back(f(0, 0).real());
    c5.push_back(f(5, 5).real());
  }
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / (v.size() - 1) / v.size())};
  };
  const auto [m0, e0] = stats(c0);
  const auto [m5, e5] = stats(c5);
  CHECK(std::abs(m0 - m5) <= 3.0 * std::hypot(e0, e5));
}
