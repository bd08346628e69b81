#include "liouvlab/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "liouvlab/parallel.hpp"
#include "liouvlab/quadrature.hpp"

namespace liouvlab {

namespace {

template <class F>
std::vector<CMatrix> map_each(std::size_t n, Exec exec, F&& f) {
  std::vector<CMatrix> out(n);
  for_each_index(exec, n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

double realization_k2(const LatticeGeometry& g, CellAveraging averaging, const CMatrix& x) {
  return std::sqrt(std::max(0.0, cell_inner(g, averaging, x, x).real()));
}

RVector positions(const LatticeGeometry& g, int axis) {
  RVector x(g.num_sites());
  for (int i = 0; i < g.num_sites(); ++i) x(i) = g.position(i, axis);
  return x;
}

// E . x as a site vector.
RVector field_potential(const LatticeGeometry& g, const RVector& field) {
  RVector v = RVector::Zero(g.num_sites());
  for (int axis = 0; axis < g.dimension(); ++axis)
    if (field(axis) != 0.0) v += field(axis) * positions(g, axis);
  return v;
}

CMatrix diagonal_commutator(const RVector& v, const CMatrix& a) {
  CMatrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = (v(i) - v(j)) * a(i, j);
  return out;
}

void require_open(const LatticeGeometry& g, const char* who) {
  if (g.boundary() != Boundary::open)
    throw UnsupportedOperation(std::string(who) + ": the position operator needs open boundary mode");
}

double mean_square_root(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size()));
}

} // namespace

void EquilibriumSpec::validate() const {
  if (!(beta > 0.0)) throw InputError("liouville.beta: must be > 0");
  if (!std::isfinite(fermi_energy)) throw InputError("liouville.fermi_energy: must be finite");
}

CMatrix fermi_function(const EquilibriumSpec& spec, const HermitianOperator& h) {
  spec.validate();
  const double ef = spec.fermi_energy;
  if (std::isinf(spec.beta))
    return h.apply([ef](double l) { return Complex(l <= ef + 1e-12 ? 1.0 : 0.0); });
  const double beta = spec.beta;
  return h.apply([ef, beta](double l) {
    const double x = beta * (l - ef);
    if (x > 0.0) {
      const double e = std::exp(-x);
      return Complex(e / (1.0 + e));
    }
    return Complex(1.0 / (1.0 + std::exp(x)));
  });
}

CovariantEnsemble equilibrium_state(const EquilibriumSpec& spec, const EnsembleDynamics& dyn) {
  spec.validate();
  return dyn.wrap(map_each(dyn.size(), dyn.exec(), [&](std::size_t i) {
    return fermi_function(spec, HermitianOperator(dyn.hamiltonian(i).static_matrix()));
  }));
}

CovariantEnsemble zeta_t(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, double t) {
  require_open(dyn.geometry(), "zeta_t");
  return gauge_transform(dyn, zeta, t);
}

CovariantEnsemble position_commutator(const CovariantEnsemble& a, int axis) {
  const auto& g = a.geometry();
  require_open(g, "position_commutator");
  if (axis < 0 || axis >= g.dimension()) throw InputError("position_commutator: axis out of range");
  const RVector x = positions(g, axis);
  std::vector<CMatrix> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = diagonal_commutator(x, a[i]);
  return a.like(std::move(m));
}

CovariantEnsemble field_commutator(const CovariantEnsemble& a, const RVector& field) {
  const auto& g = a.geometry();
  require_open(g, "field_commutator");
  if (field.size() != g.dimension()) throw InputError("field_commutator: field length differs from dimension");
  const RVector v = field_potential(g, field);
  std::vector<CMatrix> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = diagonal_commutator(v, a[i]);
  return a.like(std::move(m));
}

Q0Check q0_check(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, int axis) {
  Q0Check out;
  const CovariantEnsemble c = position_commutator(zeta, axis);
  out.commutator_form = k2_norm(apply_HL_sqrt(dyn, c, dyn.settings().s0), dyn.exec());
  const auto& g = zeta.geometry();
  const RVector x = positions(g, axis);
  const auto& cell = g.cell_sites(g.reference_cell());
  std::vector<double> m(zeta.size());
  for_each_index(dyn.exec(), zeta.size(), [&](std::size_t i) {
    double s = 0.0;
    for (int y : cell)
      for (int site = 0; site < g.num_sites(); ++site) s += std::pow(x(site), 4) * std::norm(zeta[i](site, y));
    m[i] = s;
  });
  out.moment = zeta.size() ? pairwise_sum(m) / static_cast<double>(zeta.size()) : 0.0;
  return out;
}

namespace {

struct DuhamelPass {
  std::vector<std::vector<CMatrix>> rho;  // [time][realization]
  std::vector<std::vector<double>> quad;
  std::vector<std::vector<double>> frozen;
};

DuhamelPass duhamel_pass(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, const CovariantEnsemble& commutator,
                         const std::vector<double>& times, const DuhamelOptions& options, int k) {
  const auto& g = dyn.geometry();
  const FieldProfile& prof = dyn.profile();
  const double eta = prof.eta();
  const double t_min = options.t_min;
  const std::size_t m = dyn.size();
  const std::size_t nt = times.size();
  const QuadratureRule& fine = gauss_legendre(options.nodes);
  const QuadratureRule& coarse = gauss_legendre(options.nodes / 2);
  const UkGrid grid{dyn.settings().s0, k};
  const double inv_k = 1.0 / k;

  DuhamelPass out;
  out.rho.assign(nt, std::vector<CMatrix>(m));
  out.quad.assign(nt, std::vector<double>(m, 0.0));
  out.frozen.assign(nt, std::vector<double>(m, 0.0));

  for_each_index(dyn.exec(), m, [&](std::size_t i) {
    const TimeDependentHamiltonian& h = dyn.hamiltonian(i);
    const int n = h.dim();
    const CMatrix& c0 = commutator[i];

    // U(g_j, s0) at the start of the current cell.
    long j = 0;
    CMatrix uj = CMatrix::Identity(n, n);
    HermitianOperator hj = h.at(grid.point(0));
    const long j_min = grid.cell(t_min);
    while (j < j_min) {
      uj = step_exponential(hj, grid.point(j + 1) - grid.point(j)) * uj;
      ++j;
      hj = h.at(grid.point(j));
    }

    CMatrix i_fine = CMatrix::Zero(n, n);
    CMatrix i_coarse = CMatrix::Zero(n, n);
    double frozen_acc = 0.0;
    double pos = t_min;

    auto integrand = [&](double r) -> CMatrix {
      const CMatrix w = step_exponential(hj, r - grid.point(j)) * uj;
      const CVector gr = gauge_unitary(g, prof, r);
      return std::exp(eta * std::min(r, 0.0)) * (w.adjoint() * gauge_conjugate(gr, c0) * w);
    };

    auto integrate_panel = [&](double lo, double hi) {
      if (!(hi > lo)) return;
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t q = 0; q < fine.nodes.size(); ++q)
        i_fine += (half * fine.weights[q]) * integrand(mid + half * fine.nodes[q]);
      for (std::size_t q = 0; q < coarse.nodes.size(); ++q)
        i_coarse += (half * coarse.weights[q]) * integrand(mid + half * coarse.nodes[q]);
      if (!prof.is_zero()) {
        const CMatrix zm = gauge_conjugate(gauge_unitary(g, prof, mid), zeta[i]);
        const CMatrix hp = h.derivative(mid);
        frozen_acc += 0.5 * inv_k * (hi - lo) * realization_k2(g, dyn.averaging(), hp * zm - zm * hp);
      }
    };

    for (std::size_t q = 0; q < nt; ++q) {
      const double target = times[q];
      while (pos < target) {
        const double cell_end = grid.point(j + 1);
        const double hi = std::min(target, cell_end);
        integrate_panel(pos, hi);
        pos = hi;
        if (pos >= cell_end) {
          uj = step_exponential(hj, cell_end - grid.point(j)) * uj;
          ++j;
          hj = h.at(grid.point(j));
        }
      }
      const double off = target - grid.point(j);
      const CMatrix ut = off > 0.0 ? CMatrix(step_exponential(hj, off) * uj) : uj;
      const CVector gt = gauge_unitary(g, prof, target);
      out.rho[q][i] = gauge_conjugate(gt, zeta[i]) - kI * (ut * i_fine * ut.adjoint());
      out.quad[q][i] = realization_k2(g, dyn.averaging(), ut * (i_fine - i_coarse) * ut.adjoint());
      out.frozen[q][i] = frozen_acc;
    }
  });
  return out;
}

} // namespace

DuhamelResult duhamel_rho(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, std::vector<double> times,
                          const DuhamelOptions& options) {
  const auto& g = dyn.geometry();
  require_open(g, "duhamel_rho");
  if (zeta.seeds() != dyn.seeds()) throw InputError("duhamel_rho: seed tables differ");
  if (options.nodes < 2 || options.nodes % 2 != 0) throw InputError("liouville.quadrature_order: must be even and >= 2");
  const double t_min = options.t_min;
  if (t_min < dyn.settings().s0)
    throw InputError("liouville.t_min: lies before the propagator interval start");
  if (!(t_min < 0.0)) throw InputError("liouville.t_min: must be < 0");
  const int k = options.k > 0 ? options.k : dyn.settings().k;
  if (k < 1) throw InputError("duhamel_rho: no product-grid resolution (k = 0)");
  std::sort(times.begin(), times.end());
  for (double t : times)
    if (t < t_min || t > dyn.settings().t1) throw InputError("duhamel_rho: time outside [t_min, t1]");

  DuhamelResult res;
  res.times = times;
  const FieldProfile& prof = dyn.profile();
  const std::size_t nt = times.size();
  const CovariantEnsemble commutator = field_commutator(zeta, prof.field());
  res.truncation_bound = std::exp(prof.eta() * t_min) / prof.eta() * k2_norm(commutator, dyn.exec());

  DuhamelPass pass = duhamel_pass(dyn, zeta, commutator, times, options, k);
  if (options.extrapolate_k) {
    DuhamelPass fine = duhamel_pass(dyn, zeta, commutator, times, options, 2 * k);
    for (std::size_t q = 0; q < nt; ++q)
      for (std::size_t i = 0; i < dyn.size(); ++i) {
        const CMatrix diff = fine.rho[q][i] - pass.rho[q][i];
        fine.frozen[q][i] = realization_k2(g, dyn.averaging(), diff);
        fine.rho[q][i] += diff;
        fine.quad[q][i] = 2.0 * fine.quad[q][i] + pass.quad[q][i];
      }
    pass = std::move(fine);
  }

  res.rho.reserve(nt);
  for (std::size_t q = 0; q < nt; ++q) {
    res.rho.push_back(dyn.wrap(std::move(pass.rho[q])));
    res.quadrature_estimate.push_back(mean_square_root(pass.quad[q]));
    res.frozen_bound.push_back(mean_square_root(pass.frozen[q]));
  }
  if (res.truncation_bound > options.accuracy) {
    res.warning = true;
    std::ostringstream msg;
    msg << "t_min = " << t_min << " leaves a truncation bound " << res.truncation_bound << " above the requested "
        << options.accuracy;
    res.message = msg.str();
  }
  return res;
}

LimitResult limit_rho(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, double t,
                      const std::vector<double>& s_list) {
  if (s_list.empty()) throw InputError("limit_rho: empty s list");
  for (std::size_t i = 1; i < s_list.size(); ++i)
    if (!(s_list[i] < s_list[i - 1])) throw InputError("limit_rho: s list must be strictly decreasing");
  LimitResult res;
  res.t = t;
  res.s = s_list;
  for (double s : s_list) {
    res.u_zeta.push_back(superpropagator(dyn, t, s, zeta));
    res.u_zeta_s.push_back(superpropagator(dyn, t, s, zeta_t(dyn, zeta, s)));
    res.cross.push_back(k2_norm(res.u_zeta.back() - res.u_zeta_s.back(), dyn.exec()));
  }
  for (std::size_t i = 1; i < s_list.size(); ++i) res.gaps.push_back(k2_norm(res.u_zeta[i] - res.u_zeta[i - 1], dyn.exec()));
  for (std::size_t i = 1; i < res.gaps.size(); ++i) {
    const double r = res.gaps[i - 1] > 0.0 ? res.gaps[i] / res.gaps[i - 1] : 0.0;
    res.gap_ratios.push_back(r);
    if (res.gaps[i - 1] > 0.0 && r >= 1.0) res.diverging = true;
  }
  if (!res.gap_ratios.empty() && !res.diverging) {
    const double r = res.gap_ratios.back();
    res.tail_estimate = res.gaps.back() * r / (1.0 - r);
  } else if (!res.gaps.empty()) {
    res.tail_estimate = res.diverging ? std::numeric_limits<double>::infinity() : res.gaps.back();
  }
  return res;
}

FormValue form_L(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b, double t) {
  FormValue v;
  v.hl = k2_inner(apply_HL_sqrt(dyn, a, t), apply_HL_sqrt(dyn, b, t), dyn.exec());
  v.hr = k2_inner(apply_HR_sqrt(dyn, a, t), apply_HR_sqrt(dyn, b, t), dyn.exec());
  v.l = v.hl - v.hr;
  return v;
}

Complex form_commutator(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b,
                        double t) {
  const CovariantEnsemble h = dyn.hamiltonians(t);
  return k2_inner(a, odot_l(h, b) - odot_r(b, h), dyn.exec());
}

LiouvilleStudy liouville_residuals(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta,
                                   const std::vector<CovariantEnsemble>& dictionary, double t,
                                   const std::vector<double>& steps, const DuhamelOptions& options) {
  LiouvilleStudy study;
  study.h = steps;
  std::vector<double> times{t};
  for (double h : steps) {
    if (!(h > 0.0)) throw InputError("liouville_residuals: steps must be > 0");
    times.push_back(t - h);
    times.push_back(t + h);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  study.duhamel = duhamel_rho(dyn, zeta, times, options);
  std::map<double, std::size_t> index;
  for (std::size_t q = 0; q < study.duhamel.times.size(); ++q) index[study.duhamel.times[q]] = q;
  const auto& rho = study.duhamel.rho;
  const CovariantEnsemble& rho_t = rho[index.at(t)];
  for (const auto& a : dictionary) {
    const Complex l = form_L(dyn, a, rho_t, t).l;
    std::vector<double> row;
    std::vector<Complex> signed_row;
    for (double h : steps) {
      const Complex up = k2_inner(a, rho[index.at(t + h)], dyn.exec());
      const Complex dn = k2_inner(a, rho[index.at(t - h)], dyn.exec());
      signed_row.push_back(kI * (up - dn) / (2.0 * h) - l);
      row.push_back(std::abs(signed_row.back()));
    }
    study.residual.push_back(std::move(row));
    study.signed_residual.push_back(std::move(signed_row));
  }
  return study;
}

double propagation_derivative_residual_t(const EnsembleDynamics& dyn, const CovariantEnsemble& a,
                                         const CovariantEnsemble& b, double t, double r, double h) {
  const Complex up = k2_inner(a, superpropagator(dyn, t + h, r, b), dyn.exec());
  const Complex dn = k2_inner(a, superpropagator(dyn, t - h, r, b), dyn.exec());
  const Complex l = form_L(dyn, a, superpropagator(dyn, t, r, b), t).l;
  return std::abs(kI * (up - dn) / (2.0 * h) - l);
}

double propagation_derivative_residual_r(const EnsembleDynamics& dyn, const CovariantEnsemble& a,
                                         const CovariantEnsemble& b, double t, double r, double h, double sign) {
  const Complex up = k2_inner(a, superpropagator(dyn, t, r + h, b), dyn.exec());
  const Complex dn = k2_inner(a, superpropagator(dyn, t, r - h, b), dyn.exec());
  const Complex l = form_L(dyn, superpropagator(dyn, r, t, a), b, r).l;
  return std::abs(kI * (up - dn) / (2.0 * h) + sign * l);
}

UniquenessCheck uniqueness_check(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b,
                                 double s, const std::vector<double>& t_grid) {
  UniquenessCheck out;
  out.scale = k2_norm(a, dyn.exec()) * k2_norm(b, dyn.exec());
  const CovariantEnsemble zero = b * Complex(0.0);
  const Complex base = k2_inner(a, b, dyn.exec());
  for (double t : t_grid) {
    out.zero_evolution = std::max(out.zero_evolution, k2_norm(superpropagator(dyn, t, s, zero), dyn.exec()));
    const CovariantEnsemble v = superpropagator(dyn, t, s, b);
    const CovariantEnsemble back = superpropagator(dyn, s, t, v);
    out.constancy = std::max(out.constancy, std::abs(k2_inner(a, back, dyn.exec()) - base));
  }
  return out;
}

double bump(double x, double center, double width) {
  const double u = (x - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

std::vector<DictionaryEntry> test_dictionary(const EnsembleDynamics& dyn) {
  const auto& g = dyn.geometry();
  require_open(g, "test_dictionary");
  const int n = g.num_sites();
  const std::size_t m = dyn.size();

  std::vector<HermitianOperator> h0(m);
  for_each_index(dyn.exec(), m, [&](std::size_t i) { h0[i] = HermitianOperator(dyn.hamiltonian(i).static_matrix()); });
  double lo = h0[0].min_eigenvalue(), hi = h0[0].max_eigenvalue();
  for (const auto& h : h0) {
    lo = std::min(lo, h.min_eigenvalue());
    hi = std::max(hi, h.max_eigenvalue());
  }
  const double span = std::max(hi - lo, 1e-3);
  const double c1 = lo + 0.35 * span, c2 = lo + 0.65 * span, w = 0.3 * span;

  auto projector = [&](int cell) {
    CMatrix p = CMatrix::Zero(n, n);
    for (int site : g.cell_sites(cell)) p(site, site) = 1.0;
    return dyn.wrap(std::vector<CMatrix>(m, p));
  };
  const int ref = g.reference_cell();
  std::vector<int> label = g.cell_label(ref);
  label[0] = label[0] + 1 < g.cells_along(0) ? label[0] + 1 : label[0] - 1;
  const int adjacent = g.cell_index(label);

  auto bump_of = [&](double center) {
    return dyn.wrap(map_each(m, dyn.exec(), [&](std::size_t i) {
      return h0[i].apply([&](double l) { return Complex(bump(l, center, w)); });
    }));
  };

  std::vector<DictionaryEntry> out;
  out.push_back({"cell_projector", projector(ref)});
  out.push_back({"adjacent_projector", projector(adjacent)});
  out.push_back({"bump_low", bump_of(c1)});
  out.push_back({"bump_high", bump_of(c2)});

  const double width = std::max(1.0, 0.25 * g.extent(0) * g.spacing());
  RVector xt(n);
  for (int site = 0; site < n; ++site) xt(site) = width * std::tanh(g.position(site, 0) / width);
  const CovariantEnsemble f = out[2].a;
  std::vector<CMatrix> comm(m);
  for (std::size_t i = 0; i < m; ++i) comm[i] = kI * diagonal_commutator(xt, f[i]);
  out.push_back({"smoothed_position_commutator", dyn.wrap(std::move(comm))});
  return out;
}

} // namespace liouvlab
