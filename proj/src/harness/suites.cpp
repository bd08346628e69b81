#include "liouvlab/harness/suites.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "liouvlab/harness/container.hpp"
#include "liouvlab/liouville.hpp"
#include "liouvlab/parallel.hpp"
#include "liouvlab/quadrature.hpp"
#include "liouvlab/reference/ode_propagator.hpp"
#include "liouvlab/reference/oracles.hpp"

namespace liouvlab::harness {

namespace {

using Settings = EnsembleDynamics::Settings;
using Geo = std::shared_ptr<const LatticeGeometry>;

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Geo geometry_of(const ExperimentConfig& c) { return std::make_shared<const LatticeGeometry>(c.make_geometry()); }

FieldProfile scaled_profile(const ExperimentConfig& c, double scale) {
  RVector e = c.make_profile().field() * scale;
  return FieldProfile(e, c.field.eta);
}

EnsembleDynamics dynamics(const ExperimentConfig& c, const SuiteContext& ctx, const FieldProfile& profile,
                          Settings settings, Geo geo = nullptr, int realizations = 0,
                          CellAveraging averaging = CellAveraging::all_cells) {
  return EnsembleDynamics(geo ? geo : geometry_of(c), c.make_model(), profile, c.disorder.master_seed,
                          realizations > 0 ? realizations : c.disorder.realizations, settings, ctx.exec, averaging);
}

Settings interval(const ExperimentConfig& c, int k) { return Settings{c.propagator.s0, c.propagator.t1, k}; }

std::vector<TimeDependentHamiltonian> hamiltonians(const ExperimentConfig& c, int count) {
  const LatticeGeometry g = c.make_geometry();
  const DisorderModel model = c.make_model();
  std::vector<TimeDependentHamiltonian> out;
  for (int i = 0; i < count; ++i)
    out.emplace_back(g, sample_realization(g, model, derive_seed(c.disorder.master_seed, i)), c.make_profile());
  return out;
}

// Test times inside the propagator interval at fixed fractions.
double at_fraction(const ExperimentConfig& c, double f) {
  return c.propagator.s0 + f * (c.propagator.t1 - c.propagator.s0);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void save_raw(const SuiteContext& ctx, const std::string& name, const CovariantEnsemble& a) {
  if (ctx.raw_dir) save_ensemble(*ctx.raw_dir / name, a);
}

std::string recipe(const SuiteContext& ctx, const std::string& r) { return ctx.raw_dir ? r : std::string(); }

// 1. Unitarity, aligned composition and the adjoint identity of U_k.
CriterionResult propagator_axioms(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const int k = c.propagator.k;
  const auto hs = hamiltonians(c, c.disorder.realizations);
  const UkGrid grid{c.propagator.s0, k};
  const long cells = grid.cell(c.propagator.t1 - 1e-12) + 1;
  const double t_a = c.propagator.t1, s_a = c.propagator.s0;
  const double mid = grid.point(cells / 2);
  const double t_b = at_fraction(c, 0.83), s_b = at_fraction(c, 0.17);
  std::vector<double> unit(hs.size()), comp(hs.size()), adj(hs.size());
  for_each_index(ctx.exec, hs.size(), [&](std::size_t i) {
    const auto& h = hs[i];
    double u = 0.0, cm = 0.0, ad = 0.0;
    for (auto [t, s] : std::vector<std::pair<double, double>>{{t_a, s_a}, {t_b, s_b}, {s_b, t_b}, {mid, t_b}}) {
      const CMatrix uts = uk_product(h, grid, t, s);
      u = std::max(u, unitarity_defect(uts));
      ad = std::max(ad, operator_norm(uk_product(h, grid, s, t) - uts.adjoint()));
    }
    // r = mid is a grid point; the second triple has r outside [s, t].
    cm = std::max(cm, operator_norm(uk_product(h, grid, t_a, mid) * uk_product(h, grid, mid, s_a) -
                                    uk_product(h, grid, t_a, s_a)));
    cm = std::max(cm, operator_norm(uk_product(h, grid, s_b, mid) * uk_product(h, grid, mid, t_b) -
                                    uk_product(h, grid, s_b, t_b)));
    unit[i] = u;
    comp[i] = cm;
    adj[i] = ad;
  });
  r.checks.push_back(make_check("unitarity_defect", 1, max_of(unit), Comparison::le, 1e-10));
  r.checks.push_back(make_check("aligned_composition_residual", 1, max_of(comp), Comparison::le, 1e-12));
  r.checks.push_back(make_check("adjoint_residual", 1, max_of(adj), Comparison::le, 1e-12));
  r.notes.push_back("k = " + std::to_string(k) + ", composition point r = " + num(mid));
  return r;
}

// 2. Convergence of the k-doubling against an adaptive Runge-Kutta oracle.
CriterionResult convergence(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const int count = std::min(2, c.disorder.realizations);
  const auto hs = hamiltonians(c, count);
  std::vector<double> dev(count), mono(count), conv(count), gaps(count), ks(count);
  for_each_index(ctx.exec, hs.size(), [&](std::size_t i) {
    const auto res = converge_propagator(hs[i], c.propagator.s0, c.propagator.t1, c.propagator.s0, c.propagator.tol,
                                         c.propagator.k0, c.propagator.cap);
    const CMatrix ref = reference::ode_propagator(hs[i], c.propagator.t1, c.propagator.s0);
    dev[i] = operator_norm(res.u - ref);
    bool decreasing = true;
    for (std::size_t q = 1; q < res.gap_history.size(); ++q)
      if (!(res.gap_history[q] < res.gap_history[q - 1])) decreasing = false;
    mono[i] = decreasing ? 1.0 : 0.0;
    conv[i] = res.converged ? 1.0 : 0.0;
    gaps[i] = res.gap;
    ks[i] = res.k;
  });
  r.checks.push_back(make_check("deviation_from_ode_reference", 2, max_of(dev), Comparison::le, 1e-5));
  double all_mono = 1.0, all_conv = 1.0;
  for (int i = 0; i < count; ++i) {
    all_mono = std::min(all_mono, mono[i]);
    all_conv = std::min(all_conv, conv[i]);
  }
  r.checks.push_back(make_check("cauchy_gaps_strictly_decreasing", 2, all_mono, Comparison::ge, 1.0));
  r.checks.push_back(make_check("converged_within_cap", 2, all_conv, Comparison::ge, 1.0));
  r.notes.push_back("final k = " + num(max_of(ks)) + ", final gap = " + num(max_of(gaps)) + ", tol = " +
                    num(c.propagator.tol));
  return r;
}

// 3. ||W_k|| against (1 + M/k)^2 e^{M|t-s|}.
CriterionResult wk_bound(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto hs = hamiltonians(c, 1);
  const auto& h = hs[0];
  const double m_hat = estimate_MI(h, c.propagator.s0, c.propagator.t1, 64);
  std::mt19937_64 rng(derive_seed(c.disorder.master_seed, 0x3b));
  std::uniform_real_distribution<double> u(c.propagator.s0, c.propagator.t1);
  std::vector<std::pair<double, double>> pairs;
  while (pairs.size() < 10) {
    const double t = u(rng), s = u(rng);
    if (t != s) pairs.emplace_back(t, s);
  }
  const std::vector<int> ks{8, 32, 128};
  std::vector<double> ratio(ks.size() * pairs.size());
  for_each_index(ctx.exec, ratio.size(), [&](std::size_t q) {
    const int k = ks[q / pairs.size()];
    const auto [t, s] = pairs[q % pairs.size()];
    const WkBound b = w_k_bound_check(h, UkGrid{c.propagator.s0, k}, t, s, m_hat);
    ratio[q] = b.norm / b.bound;
  });
  r.checks.push_back(make_check("wk_norm_over_bound", 3, max_of(ratio), Comparison::le, 1.0));
  r.notes.push_back("M_I estimate (64-point grid) = " + num(m_hat) + ", inflated by 10% in the bound");
  return r;
}

// 4. Dyson reconstruction of H(t)^{1/2} U H(s)^{-1/2} and the factorial bound.
CriterionResult dyson(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto hs = hamiltonians(c, 1);
  const auto& h = hs[0];
  const double m_hat = estimate_MI(h, c.propagator.s0, c.propagator.t1, 64);
  const PropagatorFn u = [&h](double t, double s) { return reference::ode_propagator(h, t, s); };
  const std::vector<std::pair<double, double>> pairs{{at_fraction(c, 0.5), at_fraction(c, 0.25)},
                                                     {at_fraction(c, 0.9), at_fraction(c, 0.7)},
                                                     {c.propagator.t1, c.propagator.t1 - 0.1},
                                                     {at_fraction(c, 0.3), at_fraction(c, 0.55)}};
  std::vector<double> recon(pairs.size()), fact(pairs.size());
  for_each_index(ctx.exec, pairs.size(), [&](std::size_t q) {
    const auto [t, s] = pairs[q];
    const auto terms = dyson_terms(h, u, t, s, 6);
    CMatrix sum = terms[0];
    double worst = 0.0;
    double bound = 1.0;
    for (std::size_t j = 1; j < terms.size(); ++j) {
      sum += terms[j];
      bound *= std::abs(t - s) * m_hat / static_cast<double>(j);
      worst = std::max(worst, operator_norm(terms[j]) / bound);
    }
    const CMatrix w = h.at(t).sqrt() * terms[0] * h.at(s).inv_sqrt();
    recon[q] = operator_norm(sum - w);
    fact[q] = worst;
  });
  r.checks.push_back(make_check("dyson_reconstruction_residual", 4, max_of(recon), Comparison::le, 1e-4));
  r.checks.push_back(make_check("dyson_term_over_factorial_bound", 4, max_of(fact), Comparison::le, 1.1));
  r.notes.push_back("J = 6, |t - s| <= 0.5, U from the Runge-Kutta oracle, M_I estimate " + num(m_hat));
  return r;
}

// 5. Gamma(t,t) = 0, Gamma_1 + Gamma_2 -> 0, Dunford-Taylor, C(t,s)/(t-s) -> C(s).
CriterionResult gamma_calculus(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const int count = std::min(2, c.disorder.realizations);
  const auto hs = hamiltonians(c, count);
  const std::vector<double> steps{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const double u = at_fraction(c, 0.75);
  const double dt_t = at_fraction(c, 0.9), dt_s = at_fraction(c, 0.7);
  std::vector<double> diag(count), slope(count), dt(count), climit(count), g1(count);
  for_each_index(ctx.exec, hs.size(), [&](std::size_t i) {
    const auto& h = hs[i];
    double z = 0.0;
    for (double t : {c.propagator.s0, u, c.propagator.t1}) z = std::max(z, gamma(h, t, t).cwiseAbs().maxCoeff());
    diag[i] = z;
    const GammaLimit gl = gamma_limit_pair(h, u, steps);
    slope[i] = loglog_slope(steps, gl.raw_residual);
    g1[i] = operator_norm(gl.gamma1 - gamma1_quadrature(h, u));
    dt[i] = dunford_taylor_check(h, dt_t, dt_s, 64);
    climit[i] = operator_norm(c_limit(h, u, {1e-2, 5e-3}) - c_closed_form(h, u));
  });
  double min_slope = slope[0];
  for (double s : slope) min_slope = std::min(min_slope, s);
  r.checks.push_back(make_check("gamma_diagonal_exactly_zero", 5, max_of(diag), Comparison::le, 0.0));
  r.checks.push_back(make_check("gamma1_plus_gamma2_slope", 5, min_slope, Comparison::ge, 0.9));
  r.checks.push_back(make_check("dunford_taylor_residual", 5, max_of(dt), Comparison::le, 1e-6));
  r.checks.push_back(make_check("c_limit_vs_closed_form", 5, max_of(climit), Comparison::le, 1e-5));
  r.checks.push_back(make_check("gamma1_vs_quadrature", 5, max_of(g1), Comparison::le, 1e-5));
  return r;
}

// 6. Gauge identity (open) and covariance under magnetic translations (periodic).
CriterionResult gauge_covariance(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto hs = hamiltonians(c, c.disorder.realizations);
  const FieldProfile prof = c.make_profile();
  std::vector<double> gauge(hs.size());
  for_each_index(ctx.exec, hs.size(), [&](std::size_t i) {
    double worst = 0.0;
    for (double t : {-6.0, c.propagator.s0, at_fraction(c, 0.5), 0.0, 1.5}) {
      const double res = gauge_identity_residual(hs[i].geometry(), hs[i].realization(), prof, t);
      worst = std::max(worst, res / operator_norm(hs[i].matrix(t)));
    }
    gauge[i] = worst;
  });
  r.checks.push_back(make_check("gauge_identity_residual_rel", 6, max_of(gauge), Comparison::le, 1e-12));

  std::vector<int> extent(c.geometry.extent.size(), 8);
  const LatticeGeometry torus(extent, Boundary::periodic, c.geometry.spacing);
  const DisorderModel model = c.make_model();
  std::vector<double> cov(c.disorder.realizations);
  for_each_index(ctx.exec, cov.size(), [&](std::size_t i) {
    const Realization w = sample_realization(torus, model, derive_seed(c.disorder.master_seed, i));
    const double norm = operator_norm(build_hamiltonian(torus, w).matrix());
    double worst = 0.0;
    for (int a : {1, 3, 5}) {
      std::vector<int> shift(extent.size(), 0);
      shift[0] = a;
      worst = std::max(worst, covariance_residual(torus, w, shift) / norm);
    }
    cov[i] = worst;
  });
  r.checks.push_back(make_check("covariance_residual_rel", 6, max_of(cov), Comparison::le, 1e-12));
  r.notes.push_back("covariance on the periodic L = 8 volume, shifts 1, 3, 5 along axis 0");
  return r;
}

// 7. Trace identities, isometry and the dagger compatibility of the superpropagator.
CriterionResult algebra(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const EnsembleDynamics dyn = dynamics(c, ctx, c.make_profile(), interval(c, c.propagator.k));
  const int n = dyn.geometry().num_sites();
  auto random_ensemble = [&](unsigned long long salt) {
    std::vector<CMatrix> m(dyn.size());
    for (std::size_t i = 0; i < dyn.size(); ++i) m[i] = reference::random_matrix(n, dyn.seeds()[i] ^ salt);
    return dyn.wrap(std::move(m));
  };
  const CovariantEnsemble a = random_ensemble(0xa1), b = random_ensemble(0xb2), cc = random_ensemble(0xc3);
  const DiamondResiduals d = diamond_identities(a, b, cc);
  r.checks.push_back(make_check("trace_inner_identity_rel", 7, d.inner / d.scale, Comparison::le, 1e-12));
  r.checks.push_back(make_check("trace_swap_identity_rel", 7, d.swap / d.scale, Comparison::le, 1e-12));
  r.checks.push_back(make_check("trace_module_identity_rel", 7, d.module / d.scale, Comparison::le, 1e-12));

  double iso = 0.0, dag = 0.0, iso_inf = 0.0;
  const double na = k2_norm(a), na_inf = norms(a).kinf;
  for (auto [t, s] : std::vector<std::pair<double, double>>{
           {c.propagator.t1, c.propagator.s0}, {at_fraction(c, 0.2), at_fraction(c, 0.9)}, {at_fraction(c, 0.6), at_fraction(c, 0.35)}}) {
    const CovariantEnsemble ua = superpropagator(dyn, t, s, a);
    iso = std::max(iso, std::abs(k2_norm(ua) / na - 1.0));
    iso_inf = std::max(iso_inf, std::abs(norms(ua).kinf / na_inf - 1.0));
    dag = std::max(dag, k2_norm(dagger(ua) - superpropagator(dyn, t, s, dagger(a))) / na);
  }
  r.checks.push_back(make_check("superpropagator_isometry_k2", 7, iso, Comparison::le, 1e-10));
  r.checks.push_back(make_check("superpropagator_isometry_kinf", 7, iso_inf, Comparison::le, 1e-10));
  r.checks.push_back(make_check("superpropagator_dagger_rel", 7, dag, Comparison::le, 1e-12));
  return r;
}

// 8. L_t(A, zeta(t)) = 0 over the test dictionary.
CriterionResult bath_lemma(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const EnsembleDynamics dyn = dynamics(c, ctx, c.make_profile(), Settings{c.propagator.s0, c.propagator.t1, 0});
  const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
  const auto dict = test_dictionary(dyn);
  double worst = 0.0;
  for (double t : {-6.0, -2.0, -1.0, -0.5, 0.0}) {
    const CovariantEnsemble zt = zeta_t(dyn, zeta, t);
    const double zn = k2_norm(apply_HL_sqrt(dyn, zt, t));
    for (const auto& entry : dict) {
      const double scale = k2_norm(apply_HL_sqrt(dyn, entry.a, t)) * zn;
      worst = std::max(worst, std::abs(form_L(dyn, entry.a, zt, t).l) / scale);
    }
  }
  r.checks.push_back(make_check("bath_lemma_rel", 8, worst, Comparison::le, 1e-8));
  r.notes.push_back("5 dictionary elements at t = -6, -2, -1, -0.5, 0");
  return r;
}

// 9. Liouville residual: FD in h against the form, before and at the floor.
CriterionResult liouville_residual(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto& lc = c.liouville;
  std::vector<double> steps = lc.fd_steps;
  std::sort(steps.begin(), steps.end(), std::greater<>());
  const double t = 0.0;
  const EnsembleDynamics dyn = dynamics(c, ctx, c.make_profile(), Settings{lc.t_min, t + steps.front(), 0});
  const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
  const auto dict = test_dictionary(dyn);
  std::vector<CovariantEnsemble> as;
  for (const auto& e : dict) as.push_back(e.a);
  DuhamelOptions opt;
  opt.t_min = lc.t_min;
  opt.nodes = lc.quadrature_order;
  opt.k = lc.k;
  opt.extrapolate_k = true;
  const LiouvilleStudy study = liouville_residuals(dyn, zeta, as, t, steps, opt);
  const auto& du = study.duhamel;
  const std::size_t qi = std::find(du.times.begin(), du.times.end(), t) - du.times.begin();

  // The residual is a h^2 + c, with c an h-independent bias left in rho by the
  // finite k. The FD order is fitted on successive differences, which cancel c.
  // The pre-floor range is the longest run of steps over which each halving
  // still cuts the raw residual by at least 2.
  double worst_slope_dev = 0.0, floor_ratio = 0.0;
  int fitted = 0;
  std::ostringstream detail;
  for (std::size_t a = 0; a < as.size(); ++a) {
    const auto& res = study.residual[a];
    const auto& sres = study.signed_residual[a];
    std::size_t end = 1;
    while (end < res.size() && res[end] * 2.0 <= res[end - 1]) ++end;
    detail << dict[a].name << ":";
    for (double v : res) detail << " " << num(v);
    if (end >= 3) {
      std::vector<double> hh, dd;
      for (std::size_t j = 0; j + 1 < end; ++j) {
        hh.push_back(steps[j]);
        dd.push_back(std::abs(sres[j] - sres[j + 1]));
      }
      const double s = loglog_slope(hh, dd);
      worst_slope_dev = std::max(worst_slope_dev, std::abs(s - 2.0));
      ++fitted;
      detail << " raw slope " << num(loglog_slope({steps.begin(), steps.begin() + end}, {res.begin(), res.begin() + end}))
             << ", difference slope " << num(s) << " over " << end << " steps; ";
    } else {
      detail << " no pre-floor range; ";
    }
    const double budget = k2_norm(as[a]) * (du.truncation_bound + du.quadrature_estimate[qi] + du.frozen_bound[qi]);
    floor_ratio = std::max(floor_ratio, res.back() / budget);
  }
  r.checks.push_back(make_check("fd_slope_deviation_from_2", 9, worst_slope_dev, Comparison::le, 0.2));
  r.checks.push_back(make_check("dictionary_entries_with_slope", 9, fitted, Comparison::ge,
                                static_cast<double>(as.size())));
  r.checks.push_back(make_check("floor_over_error_budget", 9, floor_ratio, Comparison::le, 1.0));
  r.notes.push_back(detail.str());
  r.notes.push_back("t = 0, t_min = " + num(lc.t_min) + ", k = " + std::to_string(lc.k) + " extrapolated with 2k; truncation bound " +
                    num(du.truncation_bound) + ", discretization estimate " + num(du.frozen_bound[qi]) +
                    ", quadrature estimate " + num(du.quadrature_estimate[qi]));
  return r;
}

struct LongDynamics {
  static constexpr int k = 32;
};

// 10. Duhamel vs limit representation, and the geometric gap rate.
CriterionResult two_representations(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto& lc = c.liouville;
  const double eta = c.field.eta;
  const double t_min = std::min(lc.t_min, -8.0);
  const EnsembleDynamics dyn = dynamics(c, ctx, c.make_profile(), Settings{t_min, 0.0, c.propagator.k});
  const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
  DuhamelOptions opt;
  opt.t_min = t_min;
  opt.nodes = lc.quadrature_order;
  const DuhamelResult du = duhamel_rho(dyn, zeta, {0.0}, opt);
  std::vector<double> s_list;
  for (double s = -2.0; s >= t_min - 1e-12; s -= 2.0) s_list.push_back(s);
  const LimitResult lim = limit_rho(dyn, zeta, 0.0, s_list);
  const CovariantEnsemble& limit = lim.u_zeta.back();
  const double diff = k2_norm(du.rho[0] - limit);
  const double budget = du.truncation_bound + lim.tail_estimate + du.quadrature_estimate[0] + du.frozen_bound[0];
  save_raw(ctx, "rho_duhamel.lvl", du.rho[0]);
  save_raw(ctx, "rho_limit.lvl", limit);
  r.checks.push_back(make_check("duhamel_vs_limit_over_budget", 10, diff / budget, Comparison::le, 1.0));
  r.checks.push_back(make_check("duhamel_vs_limit_k2", 10, diff, Comparison::le, budget, 0.0,
                                recipe(ctx, "k2_distance:rho_duhamel.lvl:rho_limit.lvl")));
  const double expected = std::exp(-2.0 * eta);
  double worst = 0.0;
  for (double ratio : lim.gap_ratios) worst = std::max(worst, std::abs(ratio / expected - 1.0));
  r.checks.push_back(make_check("gap_ratio_rel_deviation", 10, worst, Comparison::le, 0.3));
  r.checks.push_back(make_check("limit_not_diverging", 10, lim.diverging ? 0.0 : 1.0, Comparison::ge, 1.0));
  r.checks.push_back(make_check("rho_hermiticity", 10, [&] {
    double w = 0.0;
    for (const auto& m : du.rho[0].matrices()) w = std::max(w, hermiticity_defect(m));
    return w;
  }(), Comparison::le, 1e-10, 0.0, recipe(ctx, "hermiticity:rho_duhamel.lvl")));
  std::ostringstream gaps;
  for (double g : lim.gaps) gaps << num(g) << " ";
  r.notes.push_back("||duhamel - limit|| = " + num(diff) + ", budget " + num(budget) + " (truncation " +
                    num(du.truncation_bound) + ", tail " + num(lim.tail_estimate) + ", quadrature " +
                    num(du.quadrature_estimate[0]) + ", frozen " + num(du.frozen_bound[0]) + "); gaps " + gaps.str());
  return r;
}

// 11. E = 0 fixed point and the approach to zeta as t -> -infinity.
CriterionResult fixed_points(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto& lc = c.liouville;
  const double eta = c.field.eta;
  {
    const EnsembleDynamics dyn =
        dynamics(c, ctx, scaled_profile(c, 0.0), Settings{lc.t_min, 0.0, LongDynamics::k});
    const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
    DuhamelOptions opt;
    opt.t_min = lc.t_min;
    opt.nodes = lc.quadrature_order;
    const DuhamelResult du = duhamel_rho(dyn, zeta, {lc.t_min / 2, -1.0, 0.0}, opt);
    double worst = 0.0;
    for (const auto& rho : du.rho)
      for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, (rho[i] - zeta[i]).cwiseAbs().maxCoeff());
    save_raw(ctx, "rho_zero_field.lvl", du.rho.back());
    save_raw(ctx, "zeta.lvl", zeta);
    r.checks.push_back(make_check("zero_field_rho_minus_zeta", 11, worst, Comparison::le, 1e-12));
    r.checks.push_back(make_check("zero_field_rho_minus_zeta_k2", 11, k2_norm(du.rho.back() - zeta), Comparison::le,
                                  1e-12, 0.0, recipe(ctx, "k2_distance:rho_zero_field.lvl:zeta.lvl")));
  }
  const double t_min = -16.0 / eta;
  const EnsembleDynamics dyn = dynamics(c, ctx, c.make_profile(), Settings{t_min, 0.0, LongDynamics::k});
  const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
  const auto dict = test_dictionary(dyn);
  const CovariantEnsemble& a = dict.back().a;
  DuhamelOptions opt;
  opt.t_min = t_min;
  opt.nodes = lc.quadrature_order;
  const std::vector<double> times{-10.0 / eta, -8.0 / eta, -6.0 / eta, -4.0 / eta};
  const DuhamelResult du = duhamel_rho(dyn, zeta, times, opt);
  const Complex base = k2_inner(a, zeta);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::ostringstream fitted;
  for (std::size_t q = 0; q < times.size(); ++q) {
    const double dev = std::abs(k2_inner(a, du.rho[q]) - base);
    const double cfit = dev * std::exp(-eta * times[q]);
    lo = std::min(lo, cfit);
    hi = std::max(hi, cfit);
    fitted << num(cfit) << " ";
  }
  r.checks.push_back(make_check("fitted_C_spread", 11, hi / lo - 1.0, Comparison::le, 0.3));
  r.notes.push_back("A = " + dict.back().name + ", fitted C at t = -10, -8, -6, -4: " + fitted.str());
  return r;
}

// 12. Volume average of one realization against the ensemble average.
CriterionResult birkhoff(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  constexpr int L = 64, M = 200;
  std::vector<int> extent(c.geometry.extent.size(), 1);
  extent[0] = L;
  auto torus = std::make_shared<const LatticeGeometry>(extent, Boundary::periodic, c.geometry.spacing);
  const DisorderModel model = c.make_model();
  const EnsembleDynamics dyn =
      dynamics(c, ctx, c.make_profile(), Settings{0.0, 1.0, 0}, torus, M, CellAveraging::single_cell);
  std::vector<HermitianOperator> h(M);
  for_each_index(ctx.exec, M, [&](std::size_t i) { h[i] = HermitianOperator(dyn.hamiltonian(i).static_matrix()); });
  // Fixed bump centred at the mean diagonal 2d/a^2 + E V + gamma.
  const double a = c.geometry.spacing;
  const double center = 2.0 * extent.size() / (a * a) + 0.5 * (c.disorder.v_plus_max - c.disorder.v_minus_max) +
                        model.gamma(*torus);
  const double width = 2.0 * extent.size() / (a * a);
  auto f = [&](double l) { return Complex(bump(l, center, width)); };
  std::vector<CMatrix> fh(M);
  for_each_index(ctx.exec, M, [&](std::size_t i) { fh[i] = h[i].apply(f); });
  const Estimate ens = tuv(dyn.wrap(std::move(fh)));
  const Realization extra = sample_realization(*torus, model, derive_seed(c.disorder.master_seed, M));
  const Estimate vol = tuv_volume(*torus, build_hamiltonian(*torus, extra).apply(f));
  const double combined = std::sqrt(ens.std_error * ens.std_error + vol.std_error * vol.std_error);
  const double z = std::abs(vol.mean - ens.mean) / combined;
  r.checks.push_back(make_check("birkhoff_z_score", 12, z, Comparison::le, 3.0));
  r.notes.push_back("ensemble " + num(ens.mean.real()) + " +/- " + num(ens.std_error) + ", volume " +
                    num(vol.mean.real()) + " +/- " + num(vol.std_error));
  return r;
}

// 13. ||rho(0) - zeta(0)||_2 is linear in |E|.
CriterionResult linear_response(const ExperimentConfig& c, const SuiteContext& ctx) {
  CriterionResult r;
  const auto& lc = c.liouville;
  const double e0 = c.make_profile().field().norm();
  const std::vector<double> magnitudes{1e-3, 2e-3, 4e-3, 1e-2};
  std::vector<double> resp;
  for (double m : magnitudes) {
    const EnsembleDynamics dyn =
        dynamics(c, ctx, scaled_profile(c, m / e0), Settings{lc.t_min, 0.0, LongDynamics::k});
    const CovariantEnsemble zeta = equilibrium_state(c.make_equilibrium(), dyn);
    DuhamelOptions opt;
    opt.t_min = lc.t_min;
    opt.nodes = lc.quadrature_order;
    const DuhamelResult du = duhamel_rho(dyn, zeta, {0.0}, opt);
    resp.push_back(k2_norm(du.rho[0] - zeta_t(dyn, zeta, 0.0)));
  }
  const double slope = loglog_slope(magnitudes, resp);
  r.checks.push_back(make_check("linear_response_slope", 13, slope, Comparison::within, 0.1, 1.0));
  std::ostringstream s;
  for (double v : resp) s << num(v) << " ";
  r.notes.push_back("|E| = 1e-3, 2e-3, 4e-3, 1e-2: " + s.str());
  return r;
}

} // namespace

bool CriterionResult::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<std::string>& criterion_titles() {
  static const std::vector<std::string> t{"",
                                          "propagator axioms",
                                          "convergence against the ODE oracle",
                                          "W_k bound",
                                          "Dyson reconstruction",
                                          "Gamma calculus",
                                          "gauge and covariance exactness",
                                          "algebra identities",
                                          "bath lemma",
                                          "Liouville residual",
                                          "two-representation agreement",
                                          "fixed points",
                                          "Birkhoff agreement",
                                          "linear response scaling"};
  return t;
}

CriterionResult run_criterion(int id, const ExperimentConfig& config, const SuiteContext& ctx) {
  using Fn = CriterionResult (*)(const ExperimentConfig&, const SuiteContext&);
  static const Fn table[] = {nullptr,          propagator_axioms, convergence,         wk_bound,     dyson,
                             gamma_calculus,   gauge_covariance,  algebra,             bath_lemma,   liouville_residual,
                             two_representations, fixed_points,   birkhoff,            linear_response};
  if (id < 1 || id > 13) throw InputError("unknown criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r = table[id](config, ctx);
  r.id = id;
  r.title = criterion_titles()[id];
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n{"smoke", "propagator", "algebra", "liouville", "birkhoff", "acceptance"};
  return n;
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "smoke") return {1, 6, 7, 8};
  if (suite == "propagator") return {1, 2, 3, 4, 5};
  if (suite == "algebra") return {6, 7};
  if (suite == "liouville") return {8, 9, 10, 11, 13};
  if (suite == "birkhoff") return {12};
  if (suite == "acceptance") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  throw ConfigError("suite: unknown suite '" + suite + "'");
}

RunReport run_suite(const ExperimentConfig& config, const SuiteContext& ctx) {
  RunReport report;
  report.suite = config.suite;
  report.config = to_json(config);
  const auto start = std::chrono::steady_clock::now();
  for (int id : suite_criteria(config.suite)) {
    CriterionResult r = run_criterion(id, config, ctx);
    for (auto& c : r.checks) report.checks.push_back(std::move(c));
    for (auto& n : r.notes) report.notes.push_back("[" + std::to_string(id) + "] " + n);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

} // namespace liouvlab::harness
