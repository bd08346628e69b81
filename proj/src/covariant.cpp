#include "liouvlab/covariant.hpp"

#include <algorithm>
#include <cmath>

#include "liouvlab/parallel.hpp"

namespace liouvlab {

namespace {

Estimate mean_and_error(const std::vector<Complex>& v) {
  Estimate e;
  if (v.empty()) return e;
  const double n = static_cast<double>(v.size());
  e.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::norm(v[i] - e.mean);
    e.std_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  }
  return e;
}

template <class F>
std::vector<CMatrix> map_each(const CovariantEnsemble& a, Exec exec, F&& f) {
  std::vector<CMatrix> out(a.size());
  for_each_index(exec, a.size(), [&](std::size_t i) { out[i] = f(i); });
  return out;
}

} // namespace

CovariantEnsemble::CovariantEnsemble(std::shared_ptr<const LatticeGeometry> geometry, std::vector<std::uint64_t> seeds,
                                     std::vector<CMatrix> matrices, CellAveraging averaging)
    : geometry_(std::move(geometry)), seeds_(std::move(seeds)), matrices_(std::move(matrices)), averaging_(averaging) {
  if (!geometry_) throw InputError("ensemble: missing geometry");
  if (seeds_.size() != matrices_.size()) throw InputError("ensemble: seed table and matrix list differ in length");
  const auto n = static_cast<Eigen::Index>(geometry_->num_sites());
  for (const auto& m : matrices_)
    if (m.rows() != n || m.cols() != n) throw InputError("ensemble: matrix dimension does not match the geometry");
}

CovariantEnsemble CovariantEnsemble::identity(std::shared_ptr<const LatticeGeometry> geometry,
                                              std::vector<std::uint64_t> seeds, CellAveraging averaging) {
  const int n = geometry->num_sites();
  std::vector<CMatrix> m(seeds.size(), CMatrix::Identity(n, n));
  return CovariantEnsemble(std::move(geometry), std::move(seeds), std::move(m), averaging);
}

CovariantEnsemble CovariantEnsemble::with_averaging(CellAveraging averaging) const {
  CovariantEnsemble out = *this;
  out.averaging_ = averaging;
  return out;
}

CovariantEnsemble CovariantEnsemble::like(std::vector<CMatrix> matrices) const {
  return CovariantEnsemble(geometry_, seeds_, std::move(matrices), averaging_);
}

void CovariantEnsemble::check_compatible(const CovariantEnsemble& other, const char* who) const {
  if (seeds_ != other.seeds_) throw InputError(std::string(who) + ": seed tables differ");
  if (!(*geometry_ == *other.geometry_)) throw InputError(std::string(who) + ": geometries differ");
  if (averaging_ != other.averaging_) throw InputError(std::string(who) + ": cell averaging modes differ");
}

CovariantEnsemble CovariantEnsemble::operator+(const CovariantEnsemble& o) const {
  check_compatible(o, "ensemble +");
  std::vector<CMatrix> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = matrices_[i] + o.matrices_[i];
  return like(std::move(m));
}

CovariantEnsemble CovariantEnsemble::operator-(const CovariantEnsemble& o) const {
  check_compatible(o, "ensemble -");
  std::vector<CMatrix> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = matrices_[i] - o.matrices_[i];
  return like(std::move(m));
}

CovariantEnsemble CovariantEnsemble::operator*(Complex c) const {
  std::vector<CMatrix> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = c * matrices_[i];
  return like(std::move(m));
}

Complex cell_trace(const LatticeGeometry& g, CellAveraging averaging, const CMatrix& x) {
  if (averaging == CellAveraging::all_cells) return x.trace() / static_cast<double>(g.num_cells());
  Complex s = 0.0;
  for (int site : g.cell_sites(g.reference_cell())) s += x(site, site);
  return s;
}

Complex cell_inner(const LatticeGeometry& g, CellAveraging averaging, const CMatrix& a, const CMatrix& b) {
  if (averaging == CellAveraging::all_cells)
    return a.conjugate().cwiseProduct(b).sum() / static_cast<double>(g.num_cells());
  Complex s = 0.0;
  for (int site : g.cell_sites(g.reference_cell())) s += a.col(site).dot(b.col(site));
  return s;
}

Complex k2_inner(const CovariantEnsemble& a, const CovariantEnsemble& b, Exec exec) {
  a.check_compatible(b, "k2_inner");
  std::vector<Complex> v(a.size());
  for_each_index(exec, a.size(), [&](std::size_t i) { v[i] = cell_inner(a.geometry(), a.averaging(), a[i], b[i]); });
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

Norms norms(const CovariantEnsemble& a, Exec exec) {
  Norms out;
  const auto& g = a.geometry();
  std::vector<double> k1(a.size()), kinf(a.size());
  for_each_index(exec, a.size(), [&](std::size_t i) {
    kinf[i] = operator_norm(a[i]);
    if (a.averaging() == CellAveraging::all_cells) {
      k1[i] = trace_norm(a[i]) / g.num_cells();
    } else {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(a[i].adjoint() * a[i]);
      const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      const CMatrix abs_a = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
      double s = 0.0;
      for (int site : g.cell_sites(g.reference_cell())) s += abs_a(site, site).real();
      k1[i] = s;
    }
  });
  if (a.size() == 0) return out;
  out.k1 = pairwise_sum(k1) / static_cast<double>(a.size());
  out.k2 = std::sqrt(std::max(0.0, k2_inner(a, a, exec).real()));
  out.kinf = *std::max_element(kinf.begin(), kinf.end());
  return out;
}

double k2_norm(const CovariantEnsemble& a, Exec exec) {
  return std::sqrt(std::max(0.0, k2_inner(a, a, exec).real()));
}

Estimate tuv(const CovariantEnsemble& a, Exec exec) {
  std::vector<Complex> v(a.size());
  for_each_index(exec, a.size(), [&](std::size_t i) { v[i] = cell_trace(a.geometry(), a.averaging(), a[i]); });
  return mean_and_error(v);
}

Estimate tuv_volume(const LatticeGeometry& g, const CMatrix& a) {
  if (a.rows() != g.num_sites() || a.cols() != g.num_sites())
    throw InputError("tuv_volume: matrix dimension does not match the geometry");
  std::vector<Complex> v(g.num_cells());
  for (int c = 0; c < g.num_cells(); ++c) {
    Complex s = 0.0;
    for (int site : g.cell_sites(c)) s += a(site, site);
    v[c] = s;
  }
  return mean_and_error(v);
}

CovariantEnsemble odot_l(const CovariantEnsemble& b, const CovariantEnsemble& a) {
  a.check_compatible(b, "odot_l");
  return a.like(map_each(a, Exec::serial, [&](std::size_t i) -> CMatrix { return b[i] * a[i]; }));
}

CovariantEnsemble odot_r(const CovariantEnsemble& a, const CovariantEnsemble& b) {
  a.check_compatible(b, "odot_r");
  return a.like(map_each(a, Exec::serial, [&](std::size_t i) -> CMatrix { return a[i] * b[i]; }));
}

CovariantEnsemble dagger(const CovariantEnsemble& a) {
  return a.like(map_each(a, Exec::serial, [&](std::size_t i) -> CMatrix { return a[i].adjoint(); }));
}

CovariantEnsemble adjoint_each(const CovariantEnsemble& a) { return dagger(a); }

CovariantEnsemble diamond(const CovariantEnsemble& a, const CovariantEnsemble& b) {
  a.check_compatible(b, "diamond");
  return a.like(map_each(a, Exec::serial, [&](std::size_t i) -> CMatrix { return a[i] * b[i]; }));
}

DiamondResiduals diamond_identities(const CovariantEnsemble& a, const CovariantEnsemble& b,
                                    const CovariantEnsemble& c) {
  DiamondResiduals r;
  const Complex tab = tuv(diamond(a, b)).mean;
  r.inner = std::abs(tab - k2_inner(dagger(a), b));
  r.swap = std::abs(tab - tuv(diamond(b, a)).mean);
  r.module = std::abs(tuv(diamond(odot_l(c, a), b)).mean - tuv(diamond(a, odot_r(b, c))).mean);
  r.scale = std::max(norms(a).k2 * norms(b).k2 * std::max(1.0, norms(c).kinf), 1e-300);
  return r;
}

EnsembleDynamics::EnsembleDynamics(std::shared_ptr<const LatticeGeometry> geometry, const DisorderModel& model,
                                   const FieldProfile& profile, std::uint64_t master_seed, int realizations,
                                   Settings settings, Exec exec, CellAveraging averaging)
    : geometry_(std::move(geometry)), profile_(profile), settings_(settings), exec_(exec), averaging_(averaging) {
  if (realizations < 1) throw InputError("disorder.realizations: must be >= 1");
  model.validate(*geometry_);
  const auto m = static_cast<std::size_t>(realizations);
  seeds_.resize(m);
  hams_.resize(m);
  props_.resize(m);
  for (std::size_t i = 0; i < m; ++i) seeds_[i] = derive_seed(master_seed, i);
  for_each_index(exec, m, [&](std::size_t i) {
    hams_[i] = std::make_unique<TimeDependentHamiltonian>(*geometry_, sample_realization(*geometry_, model, seeds_[i]),
                                                          profile_);
    if (settings_.k > 0)
      props_[i] = std::make_unique<ProductPropagator>(*hams_[i], settings_.s0, settings_.t1, settings_.k);
  });
}

const ProductPropagator& EnsembleDynamics::propagator(std::size_t i) const {
  if (!props_[i]) throw UnsupportedOperation("ensemble dynamics built without propagators (k = 0)");
  return *props_[i];
}

CovariantEnsemble EnsembleDynamics::wrap(std::vector<CMatrix> matrices) const {
  return CovariantEnsemble(geometry_, seeds_, std::move(matrices), averaging_);
}

CovariantEnsemble EnsembleDynamics::hamiltonians(double t) const {
  std::vector<CMatrix> m(size());
  for_each_index(exec_, size(), [&](std::size_t i) { m[i] = hams_[i]->matrix(t); });
  return wrap(std::move(m));
}

CovariantEnsemble superpropagator(const EnsembleDynamics& dyn, double t, double s, const CovariantEnsemble& a) {
  if (a.seeds() != dyn.seeds()) throw InputError("superpropagator: seed tables differ");
  if (t == s) return a;
  return a.like(map_each(a, dyn.exec(), [&](std::size_t i) -> CMatrix {
    const CMatrix u = dyn.propagator(i)(t, s);
    return u * a[i] * u.adjoint();
  }));
}

CovariantEnsemble apply_HL_sqrt(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t) {
  if (a.seeds() != dyn.seeds()) throw InputError("apply_HL_sqrt: seed tables differ");
  return a.like(map_each(a, dyn.exec(),
                         [&](std::size_t i) -> CMatrix { return dyn.hamiltonian(i).at(t).sqrt() * a[i]; }));
}

CovariantEnsemble apply_HR_sqrt(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t) {
  return dagger(apply_HL_sqrt(dyn, dagger(a), t));
}

std::pair<double, double> q0_membership(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t) {
  return {norms(apply_HL_sqrt(dyn, a, t)).k2, norms(apply_HL_sqrt(dyn, dagger(a), t)).k2};
}

CovariantEnsemble gauge_transform(const EnsembleDynamics& dyn, const CovariantEnsemble& a, double t, bool inverse) {
  CVector g = gauge_unitary(dyn.geometry(), dyn.profile(), t);
  if (inverse) g = g.conjugate();
  return a.like(map_each(a, Exec::serial, [&](std::size_t i) -> CMatrix { return gauge_conjugate(g, a[i]); }));
}

} // namespace liouvlab
