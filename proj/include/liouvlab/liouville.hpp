#pragma once

#include <limits>
#include <string>
#include <vector>

#include "liouvlab/covariant.hpp"
#include "liouvlab/types.hpp"

namespace liouvlab {

/// Fermi-Dirac state 1/(1 + e^{beta (H - E_F)}); beta = inf gives the Fermi
/// projection, including eigenvalues <= E_F + 1e-12.
struct EquilibriumSpec {
  double beta = std::numeric_limits<double>::infinity();
  double fermi_energy = 0.0;
  void validate() const;
};

CMatrix fermi_function(const EquilibriumSpec& spec, const HermitianOperator& h);
/// zeta_omega = f(H_omega) at zero field.
CovariantEnsemble equilibrium_state(const EquilibriumSpec& spec, const EnsembleDynamics& dyn);
/// zeta_omega(t) = G(t) zeta_omega G(t)*.
CovariantEnsemble zeta_t(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, double t);

/// [x_k, A] per realization (x from the geometry origin).
CovariantEnsemble position_commutator(const CovariantEnsemble& a, int axis);
/// [E . x, A].
CovariantEnsemble field_commutator(const CovariantEnsemble& a, const RVector& field);

struct Q0Check {
  double commutator_form = 0.0;  ///< ||H^{1/2} [x_k, zeta]||_2
  double moment = 0.0;           ///< E ||x_k^2 zeta chi_0||_2^2 with the single reference cell
};
Q0Check q0_check(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, int axis);

struct DuhamelOptions {
  double t_min = -8.0;
  int nodes = 8;
  /// Truncation bounds above this raise the warning flag.
  double accuracy = 1e-6;
  /// Product-grid resolution; 0 takes the ensemble's propagator k.
  int k = 0;
  /// Return 2 rho_{2k} - rho_k, which cancels the first-order frozen-generator
  /// bias; frozen_bound then reports ||rho_{2k} - rho_k||_2.
  bool extrapolate_k = false;
};

struct DuhamelResult {
  std::vector<double> times;
  std::vector<CovariantEnsemble> rho;
  double truncation_bound = 0.0;           ///< e^{eta t_min}/eta ||[E.x, zeta]||_2
  std::vector<double> quadrature_estimate;  ///< ||Q_n - Q_{n/2}||_2 accumulated to each time
  std::vector<double> frozen_bound;         ///< (1/2k) int ||[H'(r), zeta(r)]||_2 dr
  bool warning = false;
  std::string message;
};

/// rho(t) = zeta(t) - i int_{t_min}^t e^{eta r_-} U(t,r)([E.x, zeta(r)]) dr on
/// panels aligned with the product grid anchored at the ensemble's s0, for all
/// `times` in one sweep. The propagator checkpoints are not needed.
DuhamelResult duhamel_rho(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, std::vector<double> times,
                          const DuhamelOptions& options = {});

struct LimitResult {
  double t = 0.0;
  std::vector<double> s;
  std::vector<CovariantEnsemble> u_zeta;    ///< U(t,s)(zeta)
  std::vector<CovariantEnsemble> u_zeta_s;  ///< U(t,s)(zeta(s))
  std::vector<double> gaps;                 ///< ||U(t,s_i) zeta - U(t,s_{i+1}) zeta||_2
  std::vector<double> gap_ratios;
  std::vector<double> cross;                ///< ||U(t,s) zeta - U(t,s) zeta(s)||_2
  double tail_estimate = 0.0;               ///< last gap * r / (1 - r)
  bool diverging = false;
};

LimitResult limit_rho(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta, double t,
                      const std::vector<double>& s_list);

struct FormValue {
  Complex hl{};
  Complex hr{};
  Complex l{};
};

/// H_{L,t}(A,B) - H_{R,t}(A,B) through the square-root maps.
FormValue form_L(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b, double t);
/// <<A, [H(t), B]>> computed directly.
Complex form_commutator(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b, double t);

struct LiouvilleStudy {
  std::vector<double> h;
  std::vector<std::vector<double>> residual;  ///< [dictionary element][step]
  std::vector<std::vector<Complex>> signed_residual;  ///< same, before the modulus
  DuhamelResult duhamel;
};

/// |i FD_t <<A, rho(t)>> - L_t(A, rho(t))| for each A and step, from one
/// Duhamel sweep over {t, t +/- h}.
LiouvilleStudy liouville_residuals(const EnsembleDynamics& dyn, const CovariantEnsemble& zeta,
                                   const std::vector<CovariantEnsemble>& dictionary, double t,
                                   const std::vector<double>& steps, const DuhamelOptions& options = {});

/// |i FD_t <<A, U(t,r) B>> - L_t(A, U(t,r) B)|.
double propagation_derivative_residual_t(const EnsembleDynamics& dyn, const CovariantEnsemble& a,
                                         const CovariantEnsemble& b, double t, double r, double h);
/// |i FD_r <<A, U(t,r) B>> + sign * L_r(U(r,t) A, B)|; the correct sign is +1.
double propagation_derivative_residual_r(const EnsembleDynamics& dyn, const CovariantEnsemble& a,
                                         const CovariantEnsemble& b, double t, double r, double h,
                                         double sign = 1.0);

struct UniquenessCheck {
  double zero_evolution = 0.0;  ///< max_t ||U(t,s)(0)||_2
  double constancy = 0.0;       ///< max_t |<<A, U(s,t) U(t,s) B>> - <<A, B>>|
  double scale = 0.0;           ///< ||A||_2 ||B||_2
};

UniquenessCheck uniqueness_check(const EnsembleDynamics& dyn, const CovariantEnsemble& a, const CovariantEnsemble& b,
                                 double s, const std::vector<double>& t_grid);

/// Smooth bump exp(-1/(1 - u^2)), u = (x - center)/width, zero for |u| >= 1.
double bump(double x, double center, double width);

struct DictionaryEntry {
  std::string name;
  CovariantEnsemble a;
};

/// Reference-cell and adjacent-cell projectors, two bumps f(H_omega) and
/// i[x~, f(H_omega)] with x~ = w tanh(x / w).
std::vector<DictionaryEntry> test_dictionary(const EnsembleDynamics& dyn);

} // namespace liouvlab
