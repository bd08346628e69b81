#include "liouvlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace liouvlab {

namespace {

std::string join(std::span<const int> v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

double wrap_phase(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  if (x > std::numbers::pi) x -= two_pi;
  if (x < -std::numbers::pi) x += two_pi;
  return x;
}

} // namespace

LatticeGeometry::LatticeGeometry(std::vector<int> extent, Boundary boundary, double spacing,
                                 std::optional<std::vector<double>> origin)
    : extent_(std::move(extent)), boundary_(boundary), spacing_(spacing) {
  const int d = dimension();
  if (d < 1 || d > 3) throw InputError("geometry: dimension must be 1, 2 or 3");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_) || spacing_ > 1.0)
    throw InputError("geometry: spacing must lie in (0, 1]");
  const double inv = 1.0 / spacing_;
  sites_per_axis_cell_ = static_cast<int>(std::lround(inv));
  if (std::abs(inv - sites_per_axis_cell_) > 1e-9)
    throw InputError("geometry: 1/spacing must be an integer");

  num_sites_ = 1;
  for (int L : extent_) {
    if (L < 1) throw InputError("geometry: every extent must be >= 1");
    if (boundary_ == Boundary::periodic) {
      if (L < 3) throw InputError("geometry: periodic extents must be >= 3");
      if (L % sites_per_axis_cell_ != 0)
        throw InputError("geometry: periodic extents must be a whole number of cells");
    }
    num_sites_ *= L;
  }

  if (origin) {
    if (static_cast<int>(origin->size()) != d) throw InputError("geometry: origin has wrong length");
    origin_ = *origin;
  } else {
    origin_.resize(d);
    for (int j = 0; j < d; ++j) origin_[j] = 0.5 * (extent_[j] - 1);
  }

  edge_of_.assign(static_cast<std::size_t>(num_sites_) * d, -1);
  for (int x = 0; x < num_sites_; ++x) {
    for (int j = 0; j < d; ++j) {
      if (auto y = neighbor(x, j)) {
        edge_of_[x * d + j] = static_cast<int>(edges_.size());
        edges_.push_back({x, *y, j});
      }
    }
  }

  cells_along_.resize(d);
  num_cells_ = 1;
  for (int j = 0; j < d; ++j) {
    cells_along_[j] = (extent_[j] + sites_per_axis_cell_ - 1) / sites_per_axis_cell_;
    num_cells_ *= cells_along_[j];
  }
  cell_of_.resize(num_sites_);
  cell_sites_.assign(num_cells_, {});
  std::vector<int> label(d);
  for (int x = 0; x < num_sites_; ++x) {
    auto c = coords(x);
    for (int j = 0; j < d; ++j) label[j] = c[j] / sites_per_axis_cell_;
    const int cell = cell_index(label);
    cell_of_[x] = cell;
    cell_sites_[cell].push_back(x);
  }
  sites_per_cell_ = 1;
  for (int j = 0; j < d; ++j) sites_per_cell_ *= std::min(sites_per_axis_cell_, extent_[j]);
}

std::vector<int> LatticeGeometry::coords(int site) const {
  std::vector<int> c(dimension());
  for (int j = 0; j < dimension(); ++j) {
    c[j] = site % extent_[j];
    site /= extent_[j];
  }
  return c;
}

int LatticeGeometry::site(std::span<const int> c) const {
  int s = 0;
  for (int j = dimension() - 1; j >= 0; --j) s = s * extent_[j] + c[j];
  return s;
}

std::optional<int> LatticeGeometry::neighbor(int s, int axis) const {
  auto c = coords(s);
  if (c[axis] + 1 < extent_[axis]) {
    ++c[axis];
  } else if (boundary_ == Boundary::periodic) {
    c[axis] = 0;
  } else {
    return std::nullopt;
  }
  return site(c);
}

double LatticeGeometry::position(int s, int axis) const {
  int n = s;
  for (int j = 0; j < axis; ++j) n /= extent_[j];
  n %= extent_[axis];
  return (n - origin_[axis]) * spacing_;
}

std::vector<int> LatticeGeometry::cell_label(int cell) const {
  std::vector<int> label(dimension());
  for (int j = 0; j < dimension(); ++j) {
    label[j] = cell % cells_along_[j];
    cell /= cells_along_[j];
  }
  return label;
}

int LatticeGeometry::cell_index(std::span<const int> label) const {
  int c = 0;
  for (int j = dimension() - 1; j >= 0; --j) c = c * cells_along_[j] + label[j];
  return c;
}

int LatticeGeometry::reference_cell() const {
  if (boundary_ == Boundary::periodic) return 0;
  std::vector<int> label(dimension());
  for (int j = 0; j < dimension(); ++j) label[j] = cells_along_[j] / 2;
  return cell_index(label);
}

int LatticeGeometry::translate(int s, std::span<const int> shift) const {
  if (boundary_ != Boundary::periodic)
    throw UnsupportedOperation("translate: requires periodic boundary mode");
  if (static_cast<int>(shift.size()) != dimension()) throw InputError("translate: shift has wrong length");
  auto c = coords(s);
  for (int j = 0; j < dimension(); ++j) {
    const long long n = c[j] + static_cast<long long>(shift[j]) * sites_per_axis_cell_;
    c[j] = static_cast<int>(((n % extent_[j]) + extent_[j]) % extent_[j]);
  }
  return site(c);
}

bool LatticeGeometry::operator==(const LatticeGeometry& o) const {
  return extent_ == o.extent_ && boundary_ == o.boundary_ && spacing_ == o.spacing_ && origin_ == o.origin_;
}

double DisorderModel::gamma(const LatticeGeometry& g) const {
  return 1.0 + v_minus_max + 2.0 * g.dimension() / (g.spacing() * g.spacing());
}

void DisorderModel::validate(const LatticeGeometry& g) const {
  auto finite_nonneg = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw InputError(std::string("disorder.") + name + ": must be finite and >= 0");
  };
  finite_nonneg(v_plus_max, "v_plus_max");
  finite_nonneg(v_minus_max, "v_minus_max");
  finite_nonneg(link_disorder, "link_disorder");
  finite_nonneg(dimerization, "dimerization");
  if (dimerization >= 1.0) throw InputError("disorder.dimerization: must be < 1");
  if (!std::isfinite(magnetic_field)) throw InputError("disorder.magnetic_field: must be finite");
  if (magnetic_field != 0.0 && g.dimension() < 2)
    throw InputError("disorder.magnetic_field: needs dimension >= 2");
  if (dimerization != 0.0 && g.boundary() == Boundary::periodic && g.extent(0) % 2 != 0)
    throw InputError("disorder.dimerization: periodic extent along axis 0 must be even");
}

void Realization::check(const LatticeGeometry& g) const {
  const auto n = static_cast<Eigen::Index>(g.num_sites());
  const auto m = static_cast<Eigen::Index>(g.edges().size());
  if (v_plus.size() != n || v_minus.size() != n)
    throw InputError("realization: potential length does not match the geometry");
  if (hopping.size() != m || background_phase.size() != m || disorder_phase.size() != m)
    throw InputError("realization: edge arrays do not match the geometry");
  if (!v_plus.allFinite() || !v_minus.allFinite())
    throw InputError("realization: non-finite potential sample");
  if (!hopping.allFinite() || !background_phase.allFinite() || !disorder_phase.allFinite())
    throw InputError("realization: non-finite edge data");
  if (!std::isfinite(gamma)) throw InputError("realization: non-finite gamma");
}

Realization Realization::translated(const LatticeGeometry& g, std::span<const int> shift) const {
  check(g);
  std::vector<int> back(shift.begin(), shift.end());
  for (int& b : back) b = -b;
  Realization out = *this;
  for (int x = 0; x < g.num_sites(); ++x) {
    const int src = g.translate(x, back);
    out.v_plus(x) = v_plus(src);
    out.v_minus(x) = v_minus(src);
  }
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto& edge = g.edges()[e];
    const int src = g.edge_index(g.translate(edge.from, back), edge.axis);
    out.hopping(e) = hopping(src);
    out.disorder_phase(e) = disorder_phase(src);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(master ^ splitmix(index));
}

Realization sample_realization(const LatticeGeometry& g, const DisorderModel& model, std::uint64_t seed) {
  model.validate(g);
  const int n = g.num_sites();
  const auto m = static_cast<Eigen::Index>(g.edges().size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Realization r;
  r.seed = seed;
  r.gamma = model.gamma(g);
  r.v_plus.resize(n);
  r.v_minus.resize(n);
  for (int x = 0; x < n; ++x) r.v_plus(x) = model.v_plus_max * unit(rng);
  for (int x = 0; x < n; ++x) r.v_minus(x) = model.v_minus_max * unit(rng);
  r.disorder_phase.resize(m);
  for (Eigen::Index e = 0; e < m; ++e) r.disorder_phase(e) = model.link_disorder * (2.0 * unit(rng) - 1.0);

  r.hopping = RVector::Ones(m);
  if (model.dimerization != 0.0) {
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto& edge = g.edges()[e];
      if (edge.axis != 0) continue;
      const int n0 = g.coords(edge.from)[0];
      r.hopping(e) = (n0 % 2 == 0) ? 1.0 + model.dimerization : 1.0 - model.dimerization;
    }
  }
  r.background_phase = landau_phases(g, model.magnetic_field);
  return r;
}

RVector landau_phases(const LatticeGeometry& g, double B) {
  const auto m = static_cast<Eigen::Index>(g.edges().size());
  RVector theta = RVector::Zero(m);
  if (B == 0.0) return theta;
  if (g.dimension() < 2) throw InputError("landau_phases: magnetic field needs dimension >= 2");
  const double a = g.spacing();
  if (g.boundary() == Boundary::periodic) {
    const double flux = B * g.extent(0) * g.extent(1) * a * a / (2.0 * std::numbers::pi);
    if (std::abs(flux - std::round(flux)) > 1e-9) {
      std::ostringstream msg;
      msg << "landau_phases: periodic mode needs B = 2 pi n / (Lx Ly a^2), got total flux " << flux
          << " flux quanta";
      throw InputError(msg.str());
    }
  }
  const int Ly = g.extent(1);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& edge = g.edges()[e];
    if (edge.axis == 0) {
      theta(e) = -B * g.position(edge.from, 1);
    } else if (edge.axis == 1 && g.coords(edge.from)[1] == Ly - 1) {
      // y wrap: compensates the jump of A_x across the seam
      theta(e) = B * Ly * g.position(edge.from, 0);
    }
  }
  return theta;
}

FieldProfile::FieldProfile(RVector field, double eta) : field_(std::move(field)), eta_(eta) {
  if (!(eta_ > 0.0) || !std::isfinite(eta_)) throw InputError("field.eta: must be > 0");
  if (field_.size() < 1 || field_.size() > 3) throw InputError("field.E: length must be 1, 2 or 3");
  if (!field_.allFinite()) throw InputError("field.E: must be finite");
}

RVector FieldProfile::electric_field(double t) const {
  return std::exp(eta_ * std::min(t, 0.0)) * field_;
}

RVector FieldProfile::switching_integral(double t) const {
  return (std::exp(eta_ * std::min(t, 0.0)) / eta_ + std::max(t, 0.0)) * field_;
}

CMatrix assemble_hamiltonian(const LatticeGeometry& g, const Realization& r, const RVector& field_shift) {
  if (field_shift.size() != g.dimension()) throw InputError("build_hamiltonian: field_shift has wrong length");
  if (!field_shift.allFinite()) throw InputError("build_hamiltonian: non-finite field_shift");
  r.check(g);
  const int n = g.num_sites();
  const double a = g.spacing();
  const double inv_a2 = 1.0 / (a * a);
  CMatrix h = CMatrix::Zero(n, n);
  const RVector v = r.potential();
  for (int x = 0; x < n; ++x) h(x, x) = 2.0 * g.dimension() * inv_a2 + v(x) + r.gamma;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto& edge = g.edges()[e];
    const double phase = a * (r.link_phase(static_cast<int>(e)) + field_shift(edge.axis));
    const Complex t = -r.hopping(e) * inv_a2 * std::exp(Complex(0.0, -phase));
    h(edge.from, edge.to) += t;
    h(edge.to, edge.from) += std::conj(t);
  }
  return h;
}

HermitianOperator build_hamiltonian(const LatticeGeometry& g, const Realization& r, const RVector& field_shift) {
  return HermitianOperator(assemble_hamiltonian(g, r, field_shift));
}

HermitianOperator build_hamiltonian(const LatticeGeometry& g, const Realization& r) {
  return build_hamiltonian(g, r, RVector::Zero(g.dimension()));
}

CMatrix link_shift(const LatticeGeometry& g, const Realization& r, int axis) {
  r.check(g);
  const int n = g.num_sites();
  const double a = g.spacing();
  CMatrix s = CMatrix::Zero(n, n);
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto& edge = g.edges()[e];
    if (edge.axis != axis) continue;
    s(edge.from, edge.to) += r.hopping(e) * std::exp(Complex(0.0, -a * r.link_phase(static_cast<int>(e))));
  }
  return s;
}

CMatrix covariant_derivative(const LatticeGeometry& g, const Realization& r, const RVector& field_shift,
                             int axis) {
  const double a = g.spacing();
  CMatrix s = std::exp(Complex(0.0, -a * field_shift(axis))) * link_shift(g, r, axis);
  return Complex(0.0, -1.0 / (2.0 * a)) * (s - CMatrix(s.adjoint()));
}

CVector gauge_phases(const LatticeGeometry& g, const RVector& field_shift) {
  if (field_shift.size() != g.dimension()) throw InputError("gauge_phases: field_shift has wrong length");
  CVector d(g.num_sites());
  for (int x = 0; x < g.num_sites(); ++x) {
    double phase = 0.0;
    for (int j = 0; j < g.dimension(); ++j) phase += field_shift(j) * g.position(x, j);
    d(x) = std::exp(Complex(0.0, phase));
  }
  return d;
}

CVector gauge_unitary(const LatticeGeometry& g, const FieldProfile& p, double t) {
  return gauge_phases(g, p.switching_integral(t));
}

CMatrix gauge_conjugate(const CVector& phases, const CMatrix& a) {
  return phases.asDiagonal() * a * phases.conjugate().asDiagonal();
}

double gauge_identity_residual(const LatticeGeometry& g, const Realization& r, const FieldProfile& p, double t) {
  if (g.boundary() != Boundary::open)
    throw UnsupportedOperation("gauge_identity_residual: requires open boundary mode");
  const RVector f = p.switching_integral(t);
  const CMatrix lhs = gauge_conjugate(gauge_phases(g, f), assemble_hamiltonian(g, r, RVector::Zero(g.dimension())));
  return operator_norm(lhs - assemble_hamiltonian(g, r, f));
}

CMatrix magnetic_translation(const LatticeGeometry& g, const RVector& background, std::span<const int> shift) {
  if (g.boundary() != Boundary::periodic)
    throw UnsupportedOperation("magnetic_translation: requires periodic boundary mode");
  if (static_cast<int>(shift.size()) != g.dimension())
    throw InputError("magnetic_translation: shift has wrong length");
  if (background.size() != static_cast<Eigen::Index>(g.edges().size()))
    throw InputError("magnetic_translation: background phase length does not match the geometry");
  const int n = g.num_sites();
  const double a = g.spacing();
  std::vector<int> back(shift.begin(), shift.end());
  for (int& b : back) b = -b;

  // mismatch(e) = a (theta(e - shift) - theta(e)); Lambda must satisfy
  // phi(from) - phi(to) = mismatch(e) mod 2 pi on every edge.
  const auto m = g.edges().size();
  std::vector<double> mismatch(m);
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& edge = g.edges()[e];
    const int src = g.edge_index(g.translate(edge.from, back), edge.axis);
    mismatch[e] = a * (background(src) - background(e));
    adj[edge.from].push_back({static_cast<int>(e), edge.to});
    adj[edge.to].push_back({static_cast<int>(e), edge.from});
  }
  std::vector<double> phi(n, 0.0);
  std::vector<bool> seen(n, false);
  for (int root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int x = q.front();
      q.pop();
      for (auto [e, y] : adj[x]) {
        if (seen[y]) continue;
        const auto& edge = g.edges()[e];
        phi[y] = (edge.from == x) ? phi[x] - mismatch[e] : phi[x] + mismatch[e];
        seen[y] = true;
        q.push(y);
      }
    }
  }
  for (std::size_t e = 0; e < m; ++e) {
    const auto& edge = g.edges()[e];
    if (std::abs(wrap_phase(phi[edge.from] - phi[edge.to] - mismatch[e])) > 1e-9) {
      throw UnsupportedOperation("magnetic_translation: shift " + join(shift) +
                                 " changes the flux holonomies; no gauge correction exists");
    }
  }

  CMatrix u = CMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) u(x, g.translate(x, back)) = std::exp(Complex(0.0, phi[x]));
  return u;
}

double covariance_residual(const LatticeGeometry& g, const Realization& r, std::span<const int> shift) {
  const CMatrix u = magnetic_translation(g, r.background_phase, shift);
  const RVector zero = RVector::Zero(g.dimension());
  const CMatrix lhs = u * assemble_hamiltonian(g, r, zero) * u.adjoint();
  return operator_norm(lhs - assemble_hamiltonian(g, r.translated(g, shift), zero));
}

CMatrix lattice_laplacian(const LatticeGeometry& g) {
  const int n = g.num_sites();
  const double inv_a2 = 1.0 / (g.spacing() * g.spacing());
  CMatrix lap = CMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) lap(x, x) = 2.0 * g.dimension() * inv_a2;
  for (const auto& edge : g.edges()) {
    lap(edge.from, edge.to) -= inv_a2;
    lap(edge.to, edge.from) -= inv_a2;
  }
  return lap;
}

bool verify_form_bound(const LatticeGeometry& g, const Realization& r, double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InputError("verify_form_bound: alpha must lie in [0, 1)");
  if (!(beta >= 0.0)) throw InputError("verify_form_bound: beta must be >= 0");
  r.check(g);
  if (alpha == 0.0) return (beta - r.v_minus.array()).minCoeff() >= 0.0;
  CMatrix m = alpha * lattice_laplacian(g);
  for (int x = 0; x < g.num_sites(); ++x) m(x, x) += beta - r.v_minus(x);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return solver.eigenvalues()(0) >= -1e-12 * scale;
}

} // namespace liouvlab
