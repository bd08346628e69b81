#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "liouvlab/lattice.hpp"
#include "liouvlab/quadrature.hpp"
#include "liouvlab/spectral.hpp"
#include "liouvlab/types.hpp"

namespace liouvlab {

/// H(t) = H(A + F(t), V) for one realization.
class TimeDependentHamiltonian {
public:
  TimeDependentHamiltonian(LatticeGeometry geometry, Realization realization, FieldProfile profile);

  const LatticeGeometry& geometry() const { return geometry_; }
  const Realization& realization() const { return realization_; }
  const FieldProfile& profile() const { return profile_; }
  int dim() const { return geometry_.num_sites(); }
  bool is_static() const { return profile_.is_zero(); }

  CMatrix matrix(double t) const;
  /// H_omega, the zero-field operator.
  const CMatrix& static_matrix() const { return base_; }
  HermitianOperator at(double t) const;
  /// D_j(F(t)) for each axis.
  CMatrix covariant_derivative(double t, int axis) const;
  /// dH/dt = -2 E(t) . D(F(t)).
  CMatrix derivative(double t) const;
  /// H(t) - H(s) from the field difference only:
  /// -(1/a^2) sum_j [(e^{-i a F_j(t)} - e^{-i a F_j(s)}) S_j + h.c.].
  CMatrix field_difference(double t, double s) const;

private:
  LatticeGeometry geometry_;
  Realization realization_;
  FieldProfile profile_;
  CMatrix base_;                 // H at zero field
  std::vector<CMatrix> shifts_;  // S_j
};

/// e^{-i dt H} from the cached eigendecomposition.
CMatrix step_exponential(const HermitianOperator& h, double dt);

/// Product-formula grid g_j = s0 + j/k; the generator on [g_j, g_{j+1}) is H(g_j).
struct UkGrid {
  double s0 = 0.0;
  int k = 1;
  double point(long j) const { return s0 + static_cast<double>(j) / k; }
  /// Index of the cell containing t (grid points belong to the cell they open).
  long cell(double t) const;
};

/// U_k(t, s) as an explicit product. For t < s the product of backward steps
/// is formed directly, so U_k(t, s) = U_k(s, t)* is a numerical identity.
CMatrix uk_product(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s);

struct PropagatorResult {
  CMatrix u;
  double t = 0.0;
  double s = 0.0;
  int k = 0;
  double gap = 0.0;  ///< ||U_k - U_{k/2}|| for the returned k (0 when not refined)
  std::vector<int> k_history;
  std::vector<double> gap_history;
  bool converged = true;
  std::optional<double> reference_deviation;
};

PropagatorResult build_uk(const TimeDependentHamiltonian& h, double s0, double t, double s, int k);

/// Doubles k from k0 until ||U_k - U_{2k}|| <= tol and returns U_{2k}; stops
/// at k = cap and flags converged = false. E = 0 returns at the first check.
PropagatorResult converge_propagator(const TimeDependentHamiltonian& h, double s0, double t, double s,
                                     double tol, int k0 = 4, int cap = 1 << 14);

/// U_k on [s0, t1] with checkpointed prefix products U_k(g_j, s0), so that
/// arbitrary U_k(t, s) costs at most one stride of steps.
class ProductPropagator {
public:
  ProductPropagator(const TimeDependentHamiltonian& h, double s0, double t1, int k,
                    std::size_t memory_budget = std::size_t{32} << 20);

  const UkGrid& grid() const { return grid_; }
  double t1() const { return t1_; }
  int dim() const { return h_->dim(); }
  const TimeDependentHamiltonian& hamiltonian() const { return *h_; }

  /// U_k(t, s0).
  CMatrix from_start(double t) const;
  /// U_k(t, s) = U_k(t, s0) U_k(s, s0)*.
  CMatrix operator()(double t, double s) const;

  /// Calls f(i, U_k(times[i], s0)) in order; `times` must be ascending.
  /// One pass over the grid, independent of the number of times.
  void sweep(const std::vector<double>& times, const std::function<void(std::size_t, const CMatrix&)>& f) const;

private:
  CMatrix cell_step(long j, double dt) const;

  const TimeDependentHamiltonian* h_;
  UkGrid grid_;
  double t1_;
  long cells_;
  long stride_;
  std::vector<CMatrix> checkpoints_;
};

using PropagatorFn = std::function<CMatrix(double, double)>;

/// Gamma(t, s) = H(t)^{1/2} (H(s)^{-1/2} - H(t)^{-1/2}); exactly 0 at t = s.
CMatrix gamma(const TimeDependentHamiltonian& h, double t, double s);
/// Gamma(t, s) / (t - s); requires t != s.
CMatrix gamma_rate(const TimeDependentHamiltonian& h, double t, double s);

/// Gamma_2(u) from the eigenbasis of H(u):
/// (Gamma_2)_mn = H'_mn / (sqrt(l_n) (sqrt(l_m) + sqrt(l_n))).
CMatrix gamma2_closed_form(const TimeDependentHamiltonian& h, double u);

struct GammaLimit {
  CMatrix gamma1;  ///< extrapolated lim Gamma(u - h, u) / h
  CMatrix gamma2;  ///< extrapolated lim Gamma(u, u - h) / h
  double residual = 0.0;  ///< ||gamma1 + gamma2|| after extrapolation
  std::vector<double> h;
  std::vector<double> raw_residual;  ///< ||Gamma_1(h) + Gamma_2(h)|| per h
};

/// One-sided difference quotients for each h, then Richardson on the two
/// smallest steps.
GammaLimit gamma_limit_pair(const TimeDependentHamiltonian& h, double u, const std::vector<double>& h_sequence);

/// Pairs (t_i, t_j), i != j, from n intervals of [lo, hi].
std::vector<std::pair<double, double>> uniform_pairs(double lo, double hi, int n);
/// max ||Gamma(t, s)|| / |t - s| over the pairs.
double estimate_MI(const TimeDependentHamiltonian& h, const std::vector<std::pair<double, double>>& pairs);
/// Same on the grid lo + i (hi - lo)/n.
double estimate_MI(const TimeDependentHamiltonian& h, double lo, double hi, int n);

/// W_k(t, s) = H(t)^{1/2} U_k(t, s) H(s)^{-1/2}.
CMatrix w_k(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s);

struct WkBound {
  double norm = 0.0;
  double bound = 0.0;
  double m_hat = 0.0;
  bool holds = false;
};

/// ||W_k|| against (1 + M/k)^2 e^{M |t - s|} with M = 1.1 * m_estimate.
WkBound w_k_bound_check(const TimeDependentHamiltonian& h, const UkGrid& grid, double t, double s,
                        double m_estimate);

/// W^(1..J)(t, s) on `order` Gauss nodes of [s, t], with U supplied by `u`.
/// Element 0 is U(t, s); element j is W^(j).
std::vector<CMatrix> dyson_terms(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                 int J, int order = 24);
CMatrix dyson_series(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s, int J,
                     int order = 24);

struct COperator {
  CMatrix definition;        ///< H(s)^{-1/2} (H(t) - H(s)) H(s)^{-1/2}
  CMatrix field_difference;  ///< same, with H(t) - H(s) from the link shifts
  double agreement = 0.0;
};

COperator c_operator(const TimeDependentHamiltonian& h, double t, double s);
/// -2 H(s)^{-1/2} (F'(s) . D(F(s))) H(s)^{-1/2}.
CMatrix c_closed_form(const TimeDependentHamiltonian& h, double s);
/// Richardson extrapolation of C(s - h, s) / (-h) over the two smallest h.
CMatrix c_limit(const TimeDependentHamiltonian& h, double s, const std::vector<double>& h_sequence);

/// Substituted Gauss-Legendre nodes for int_0^inf lambda^{-1/2} g(lambda) d lambda,
/// lambda = tan^2 theta; the returned weights already include 2 sec^2 theta.
QuadratureRule dunford_taylor_rule(int nodes);

/// ||(H(s)^{-1/2} - H(t)^{-1/2}) - (1/pi) int lambda^{-1/2} (H(t)+lambda)^{-1}
///   H(s)^{1/2} C(t,s) H(s)^{1/2} (H(s)+lambda)^{-1} d lambda||.
double dunford_taylor_check(const TimeDependentHamiltonian& h, double t, double s, int nodes = 64);

/// Gamma_1(u) from the integral representation with the closed-form C(u).
CMatrix gamma1_quadrature(const TimeDependentHamiltonian& h, double u, int nodes = 64);

/// |FD_t <phi, U(t,s) psi> + i <H(t)^{1/2} phi, H(t)^{1/2} U(t,s) psi>| with a central difference.
double weak_derivative_residual_t(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                  const CVector& phi, const CVector& psi, double step);
/// s-version: |FD_s <phi, U(t,s) psi> - sign * i <H(s)^{1/2} U(s,t) phi, H(s)^{1/2} psi>|; the
/// correct sign is +1.
double weak_derivative_residual_s(const TimeDependentHamiltonian& h, const PropagatorFn& u, double t, double s,
                                  const CVector& phi, const CVector& psi, double step, double sign = 1.0);

} // namespace liouvlab
