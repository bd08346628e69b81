#include "liouvlab/propagator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace liouvlab {

namespace {

// First-order Richardson for samples at h1 > h2.
template <class T>
T extrapolate(const T& x1, double h1, const T& x2, double h2) {
  const double r = h1 / h2;
  return (r * x2 - x1) / (r - 1.0);
}

void check_steps(const std::vector<double>& hs, const char* who) {
  if (hs.size() < 2) throw InputError(std::string(who) + ": need at least two steps");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0)) throw InputError(std::string(who) + ": steps must be > 0");
    if (i && !(hs[i] < hs[i - 1])) throw InputError(std::string(who) + ": steps must decrease");
  }
}

} // namespace

TimeDependentHamiltonian::TimeDependentHamiltonian(LatticeGeometry geometry, Realization realization,
                                                   FieldProfile profile)
    : geometry_(std::move(geometry)), realization_(std::move(realization)), profile_(std::move(profile)) {
  if (profile_.field().size() != geometry_.dimension())
    throw InputError("field.E: length must equal the lattice dimension");
  realization_.check(geometry_);
  base_ = assemble_hamiltonian(geometry_, realization_, RVector::Zero(geometry_.dimension()));
  for (int j = 0; j < geometry_.dimension(); ++j) shifts_.push_back(link_shift(geometry_, realization_, j));
}

CMatrix TimeDependentHamiltonian::matrix(double t) const {
  if (is_static()) return base_;
  return assemble_hamiltonian(geometry_, realization_, profile_.switching_integral(t));
}

HermitianOperator TimeDependentHamiltonian::at(double t) const { return HermitianOperator(matrix(t)); }

CMatrix TimeDependentHamiltonian::covariant_derivative(double t, int axis) const {
  const double a = geometry_.spacing();
  const double f = profile_.switching_integral(t)(axis);
  const CMatrix s = std::exp(Complex(0.0, -a * f)) * shifts_[axis];
  return Complex(0.0, -1.0 / (2.0 * a)) * (s - CMatrix(s.adjoint()));
}

CMatrix TimeDependentHamiltonian::derivative(double t) const {
  CMatrix d = CMatrix::Zero(dim(), dim());
  if (is_static()) return d;
  const RVector e = profile_.electric_field(t);
  for (int j = 0; j < geometry_.dimension(); ++j) {
    if (e(j) != 0.0) d -= 2.0 * e(j) * covariant_derivative(t, j);
  }
  return d;
}

CMatrix TimeDependentHamiltonian::field_difference(double t, double s) const {
  const double a = geometry_.spacing();
  const RVector ft = profile_.switching_integral(t), fs = profile_.switching_integral(s);
  CMatrix d = CMatrix::Zero(dim(), dim());
  for (int j = 0; j < geometry_.dimension(); ++j) {
    const Complex c = std::exp(Complex(0.0, -a * ft(j))) - std::exp(Complex(0.0, -a * fs(j)));
    const CMatrix term = c * shifts_[j];
    d -= (term + CMatrix(term.adjoint())) / (a * a);
  }
  return d;
}

CMatrix step_exponential(const HermitianOperator& h, double dt) { return h.propagate(dt); }

long UkGrid::cell(double t) const {
  const double u = (t - s0) * k;
  if (u < -1e-9) {
    std::ostringstream msg;
    msg << "U_k grid: time " << t << " precedes the interval start " << s0;
    throw InputError(msg.str());
  }
  return static_cast<long>(std::floor(u + 1e-9));
}

namespace {

// Calls f(j, dt) for the factors of U_k(t, s) in order of application.
template <class F>
void for_each_segment(const UkGrid& g, double t, double s, F&& f) {
  if (t == s) return;
  const long js = g.cell(s), jt = g.cell(t);
  if (t > s) {
    for (long j = js; j <= jt; ++j) {
      const double a = std::max(s, g.point(j)), b = std::min(t, g.point(j + 1));
      if (b > a) f(j, b - a);
    }
  } else {
    for (long j = js; j >= jt; --j) {
      const double a = std::min(s, g.point(j + 1)), b = std::max(t, g.point(j));
      if (b < a) f(j, b - a);
    }
  }
}

} // namespace

CMatrix uk_product(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s) {
  if (grid.k < 1) throw InputError("U_k: k must be >= 1");
  CMatrix u = CMatrix::Identity(h.dim(), h.dim());
  for_each_segment(grid, t, s, [&](long j, double dt) {
    u = step_exponential(h.at(grid.point(j)), dt) * u;
  });
  return u;
}

PropagatorResult build_uk(const TimeDependentHamiltonian& h, double s0, double t, double s, int k) {
  PropagatorResult r;
  r.u = uk_product(h, UkGrid{s0, k}, t, s);
  r.t = t;
  r.s = s;
  r.k = k;
  r.k_history = {k};
  return r;
}

PropagatorResult converge_propagator(const TimeDependentHamiltonian& h, double s0, double t, double s, double tol,
                                     int k0, int cap) {
  if (!(tol > 0.0)) throw InputError("propagator.tol: must be > 0");
  if (k0 < 1) throw InputError("propagator.k0: must be >= 1");
  PropagatorResult r;
  r.t = t;
  r.s = s;
  int k = k0;
  CMatrix prev = uk_product(h, UkGrid{s0, k}, t, s);
  r.k_history.push_back(k);
  r.u = prev;
  r.k = k;
  r.converged = false;
  while (2L * k <= cap) {
    CMatrix next = uk_product(h, UkGrid{s0, 2 * k}, t, s);
    const double gap = operator_norm(next - prev);
    k *= 2;
    r.k_history.push_back(k);
    r.gap_history.push_back(gap);
    r.u = next;
    r.k = k;
    r.gap = gap;
    if (gap <= tol) {
      r.converged = true;
      break;
    }
    prev = std::move(next);
  }
  return r;
}

ProductPropagator::ProductPropagator(const TimeDependentHamiltonian& h, double s0, double t1, int k,
                                     std::size_t memory_budget)
    : h_(&h), grid_{s0, k}, t1_(t1) {
  if (k < 1) throw InputError("propagator.k: must be >= 1");
  if (!(t1 > s0)) throw InputError("propagator.interval: end must exceed start");
  cells_ = grid_.cell(t1) + 1;
  const std::size_t per = sizeof(Complex) * static_cast<std::size_t>(h.dim()) * h.dim();
  const long max_cp = std::max<long>(2, static_cast<long>(memory_budget / std::max<std::size_t>(per, 1)));
  stride_ = std::max<long>(1, (cells_ + max_cp - 1) / max_cp);

  CMatrix u = CMatrix::Identity(h.dim(), h.dim());
  checkpoints_.push_back(u);
  for (long j = 0; j < cells_; ++j) {
    u = cell_step(j, grid_.point(j + 1) - grid_.point(j)) * u;
    if ((j + 1) % stride_ == 0) checkpoints_.push_back(u);
  }
}

CMatrix ProductPropagator::cell_step(long j, double dt) const {
  return step_exponential(h_->at(grid_.point(j)), dt);
}

CMatrix ProductPropagator::from_start(double t) const {
  if (t > t1_ + 1e-12) throw InputError("propagator: time beyond the interval end");
  const long j = grid_.cell(t);
  const long c = std::min<long>(j / stride_, static_cast<long>(checkpoints_.size()) - 1);
  CMatrix u = checkpoints_[c];
  for (long m = c * stride_; m < j; ++m) u = cell_step(m, grid_.point(m + 1) - grid_.point(m)) * u;
  const double dt = t - grid_.point(j);
  if (dt > 0.0) u = cell_step(j, dt) * u;
  return u;
}

CMatrix ProductPropagator::operator()(double t, double s) const {
  if (t == s) return CMatrix::Identity(dim(), dim());
  return from_start(t) * from_start(s).adjoint();
}

void ProductPropagator::sweep(const std::vector<double>& times,
                              const std::function<void(std::size_t, const CMatrix&)>& f) const {
  CMatrix u = CMatrix::Identity(dim(), dim());
  long cur = 0;
  double last = grid_.s0;
  std::optional<HermitianOperator> cur_h;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < last) throw InputError("propagator sweep: times must be ascending");
    if (t > t1_ + 1e-12) throw InputError("propagator sweep: time beyond the interval end");
    last = t;
    const long j = grid_.cell(t);
    while (cur < j) {
      const HermitianOperator hc = cur_h ? std::move(*cur_h) : h_->at(grid_.point(cur));
      cur_h.reset();
      u = step_exponential(hc, grid_.point(cur + 1) - grid_.point(cur)) * u;
      ++cur;
    }
    const double dt = t - grid_.point(j);
    if (dt > 0.0) {
      if (!cur_h) cur_h = h_->at(grid_.point(j));
      f(i, step_exponential(*cur_h, dt) * u);
    } else {
      f(i, u);
    }
  }
}

CMatrix gamma(const TimeDependentHamiltonian& h, double t, double s) {
  if (t == s) return CMatrix::Zero(h.dim(), h.dim());
  const HermitianOperator ht = h.at(t), hs = h.at(s);
  return ht.sqrt() * (hs.inv_sqrt() - ht.inv_sqrt());
}

CMatrix gamma_rate(const TimeDependentHamiltonian& h, double t, double s) {
  if (t == s) throw InputError("gamma_rate: requires t != s");
  return gamma(h, t, s) / (t - s);
}

CMatrix gamma2_closed_form(const TimeDependentHamiltonian& h, double u) {
  const HermitianOperator hu = h.at(u);
  const CMatrix& v = hu.eigenvectors();
  const RVector root = hu.eigenvalues().cwiseSqrt();
  CMatrix d = v.adjoint() * h.derivative(u) * v;
  for (Eigen::Index m = 0; m < d.rows(); ++m)
    for (Eigen::Index n = 0; n < d.cols(); ++n) d(m, n) /= root(n) * (root(m) + root(n));
  return v * d * v.adjoint();
}

GammaLimit gamma_limit_pair(const TimeDependentHamiltonian& h, double u, const std::vector<double>& hs) {
  check_steps(hs, "gamma_limit_pair");
  GammaLimit out;
  out.h = hs;
  std::vector<CMatrix> g1, g2;
  for (double step : hs) {
    g1.push_back(gamma(h, u - step, u) / step);
    g2.push_back(gamma(h, u, u - step) / step);
    out.raw_residual.push_back(operator_norm(g1.back() + g2.back()));
  }
  const std::size_t n = hs.size();
  out.gamma1 = extrapolate(g1[n - 2], hs[n - 2], g1[n - 1], hs[n - 1]);
  out.gamma2 = extrapolate(g2[n - 2], hs[n - 2], g2[n - 1], hs[n - 1]);
  out.residual = operator_norm(out.gamma1 + out.gamma2);
  return out;
}

std::vector<std::pair<double, double>> uniform_pairs(double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) throw InputError("uniform_pairs: need n >= 1 and hi > lo");
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (i != j) pairs.emplace_back(lo + (hi - lo) * i / n, lo + (hi - lo) * j / n);
  return pairs;
}

double estimate_MI(const TimeDependentHamiltonian& h, const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw InputError("estimate_MI: empty grid");
  double best = 0.0;
  for (auto [t, s] : pairs) {
    if (t == s) throw InputError("estimate_MI: pairs must have t != s");
    best = std::max(best, operator_norm(gamma(h, t, s)) / std::abs(t - s));
  }
  return best;
}

double estimate_MI(const TimeDependentHamiltonian& h, double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) throw InputError("estimate_MI: need n >= 1 and hi > lo");
  if (h.is_static()) return 0.0;
  std::vector<CMatrix> root(n + 1), inv_root(n + 1);
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) {
    t[i] = lo + (hi - lo) * i / n;
    const HermitianOperator hi_op = h.at(t[i]);
    root[i] = hi_op.sqrt();
    inv_root[i] = hi_op.inv_sqrt();
  }
  double best = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const CMatrix g = root[i] * (inv_root[j] - inv_root[i]);
      best = std::max(best, operator_norm(g) / std::abs(t[i] - t[j]));
    }
  return best;
}

CMatrix w_k(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s) {
  return h.at(t).sqrt() * uk_product(h, grid, t, s) * h.at(s).inv_sqrt();
}

WkBound w_k_bound_check(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s,
                        double m_estimate) {
  WkBound b;
  b.m_hat = 1.1 * m_estimate;
  b.norm = operator_norm(w_k(h, grid, t, s));
  b.bound = std::pow(1.0 + b.m_hat / grid.k, 2) * std::exp(b.m_hat * std::abs(t - s));
  b.holds = b.norm <= b.bound * (1.0 + 1e-12);
  return b;
}

std::vector<CMatrix> dyson_terms(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                 int J, int order) {
  if (J < 0) throw InputError("dyson_terms: J must be >= 0");
  const int n = h.dim();
  std::vector<CMatrix> out;
  out.push_back(u(t, s));
  if (J == 0) return out;
  if (t == s || h.is_static()) {
    for (int j = 1; j <= J; ++j) out.push_back(CMatrix::Zero(n, n));
    return out;
  }
  const QuadratureRule rule = gauss_legendre(order, s, t);
  const Eigen::MatrixXd q = integration_matrix(order, s, t);
  // Interaction picture: X(v) = U(s,v) Gamma_2(v) U(v,s), Y_j(x) = int_s^x X Y_{j-1},
  // W^(j)(t,s) = U(t,s) Y_j(t).
  std::vector<CMatrix> x(order), y(order, CMatrix::Identity(n, n));
  for (int i = 0; i < order; ++i) {
    const CMatrix uv = u(rule.nodes[i], s);
    x[i] = uv.adjoint() * gamma2_closed_form(h, rule.nodes[i]) * uv;
  }
  for (int j = 1; j <= J; ++j) {
    std::vector<CMatrix> xy(order);
    CMatrix total = CMatrix::Zero(n, n);
    for (int i = 0; i < order; ++i) {
      xy[i] = x[i] * y[i];
      total += rule.weights[i] * xy[i];
    }
    for (int i = 0; i < order; ++i) {
      CMatrix acc = CMatrix::Zero(n, n);
      for (int k = 0; k < order; ++k) acc += q(i, k) * xy[k];
      y[i] = std::move(acc);
    }
    out.push_back(out[0] * total);
  }
  return out;
}

CMatrix dyson_series(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s, int J,
                     int order) {
  const auto terms = dyson_terms(h, u, t, s, J, order);
  CMatrix sum = terms[0];
  for (std::size_t j = 1; j < terms.size(); ++j) sum += terms[j];
  return sum;
}

COperator c_operator(const TimeDependentHamiltonian& h, double t, double s) {
  COperator c;
  const int n = h.dim();
  if (t == s) {
    c.definition = c.field_difference = CMatrix::Zero(n, n);
    return c;
  }
  const CMatrix is = h.at(s).inv_sqrt();
  c.definition = is * (h.matrix(t) - h.matrix(s)) * is;
  c.field_difference = is * h.field_difference(t, s) * is;
  c.agreement = operator_norm(c.definition - c.field_difference);
  return c;
}

CMatrix c_closed_form(const TimeDependentHamiltonian& h, double s) {
  const int n = h.dim();
  if (h.is_static()) return CMatrix::Zero(n, n);
  const RVector fp = h.profile().electric_field(s);
  CMatrix fd = CMatrix::Zero(n, n);
  for (int j = 0; j < h.geometry().dimension(); ++j) fd += fp(j) * h.covariant_derivative(s, j);
  const CMatrix is = h.at(s).inv_sqrt();
  return -2.0 * is * fd * is;
}

CMatrix c_limit(const TimeDependentHamiltonian& h, double s, const std::vector<double>& hs) {
  check_steps(hs, "c_limit");
  const std::size_t n = hs.size();
  const CMatrix c1 = c_operator(h, s - hs[n - 2], s).definition / (-hs[n - 2]);
  const CMatrix c2 = c_operator(h, s - hs[n - 1], s).definition / (-hs[n - 1]);
  return extrapolate(c1, hs[n - 2], c2, hs[n - 1]);
}

QuadratureRule dunford_taylor_rule(int nodes) {
  QuadratureRule r = gauss_legendre(nodes, 0.0, 0.5 * std::numbers::pi);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double th = r.nodes[i];
    const double c = std::cos(th);
    r.nodes[i] = std::tan(th) * std::tan(th);
    r.weights[i] *= 2.0 / (c * c);
  }
  return r;
}

double dunford_taylor_check(const TimeDependentHamiltonian& h, double t, double s, int nodes) {
  if (t == s) return 0.0;
  const HermitianOperator ht = h.at(t), hs = h.at(s);
  const CMatrix lhs = hs.inv_sqrt() - ht.inv_sqrt();
  const CMatrix root_s = hs.sqrt();
  const CMatrix middle = root_s * c_operator(h, t, s).definition * root_s;
  const QuadratureRule rule = dunford_taylor_rule(nodes);
  CMatrix rhs = CMatrix::Zero(h.dim(), h.dim());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double lam = rule.nodes[i];
    rhs += rule.weights[i] * (ht.resolvent(lam) * middle * hs.resolvent(lam));
  }
  rhs /= std::numbers::pi;
  return operator_norm(lhs - rhs);
}

CMatrix gamma1_quadrature(const TimeDependentHamiltonian& h, double u, int nodes) {
  const HermitianOperator hu = h.at(u);
  const CMatrix root = hu.sqrt();
  const CMatrix middle = root * c_closed_form(h, u) * root;
  const QuadratureRule rule = dunford_taylor_rule(nodes);
  CMatrix out = CMatrix::Zero(h.dim(), h.dim());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const CMatrix r = hu.resolvent(rule.nodes[i]);
    out += rule.weights[i] * (root * r * middle * r);
  }
  return -out / std::numbers::pi;
}

double weak_derivative_residual_t(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                  const CVector& phi, const CVector& psi, double step) {
  const Complex fd = (phi.dot(u(t + step, s) * psi) - phi.dot(u(t - step, s) * psi)) / (2.0 * step);
  const CMatrix root = h.at(t).sqrt();
  const Complex form = (root * phi).dot(root * (u(t, s) * psi));
  return std::abs(fd + kI * form);
}

double weak_derivative_residual_s(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                  const CVector& phi, const CVector& psi, double step, double sign) {
  const Complex fd = (phi.dot(u(t, s + step) * psi) - phi.dot(u(t, s - step) * psi)) / (2.0 * step);
  const CMatrix root = h.at(s).sqrt();
  const Complex form = (root * (u(s, t) * phi)).dot(root * psi);
  return std::abs(fd - sign * kI * form);
}

} // namespace liouvlab
