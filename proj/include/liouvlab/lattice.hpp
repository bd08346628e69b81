#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "liouvlab/spectral.hpp"
#include "liouvlab/types.hpp"

namespace liouvlab {

enum class Boundary { open, periodic };

/// Finite d-dimensional grid (d <= 3) with its unit-cell decomposition.
///
/// Sites are numbered lexicographically with axis 0 fastest. A site with
/// integer coordinates n has position (n - origin) * spacing; the origin
/// defaults to the volume center. Unit cells are the integer parts of the
/// positions measured from site 0, so 1/spacing must be an integer.
class LatticeGeometry {
public:
  struct Edge {
    int from;
    int to;
    int axis;
  };

  LatticeGeometry(std::vector<int> extent, Boundary boundary, double spacing = 1.0,
                  std::optional<std::vector<double>> origin = std::nullopt);

  int dimension() const { return static_cast<int>(extent_.size()); }
  int extent(int axis) const { return extent_[axis]; }
  const std::vector<int>& extents() const { return extent_; }
  int num_sites() const { return num_sites_; }
  double spacing() const { return spacing_; }
  Boundary boundary() const { return boundary_; }
  const std::vector<double>& origin() const { return origin_; }

  std::vector<int> coords(int site) const;
  int site(std::span<const int> coords) const;

  /// Forward neighbor along `axis`, wrapping in periodic mode.
  std::optional<int> neighbor(int site, int axis) const;
  /// Forward edges; the reversed edge is implied and carries the negated phase.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge index of the forward edge leaving `site` along `axis`, or -1.
  int edge_index(int site, int axis) const { return edge_of_[site * dimension() + axis]; }

  /// Position coordinate along `axis`, measured from the origin.
  double position(int site, int axis) const;

  int num_cells() const { return num_cells_; }
  int sites_per_cell() const { return sites_per_cell_; }
  int cells_along(int axis) const { return cells_along_[axis]; }
  int cell_of(int site) const { return cell_of_[site]; }
  std::vector<int> cell_label(int cell) const;
  int cell_index(std::span<const int> label) const;
  const std::vector<int>& cell_sites(int cell) const { return cell_sites_[cell]; }
  /// The cell playing the role of chi_0: the volume center in open mode,
  /// the cell at label 0 in periodic mode.
  int reference_cell() const;

  /// Site reached by shifting `site` by `shift` cells (periodic mode only).
  int translate(int site, std::span<const int> shift) const;

  bool operator==(const LatticeGeometry& other) const;

private:
  std::vector<int> extent_;
  Boundary boundary_;
  double spacing_;
  std::vector<double> origin_;
  int num_sites_ = 0;
  int sites_per_axis_cell_ = 1;
  std::vector<Edge> edges_;
  std::vector<int> edge_of_;
  std::vector<int> cells_along_;
  int num_cells_ = 0;
  int sites_per_cell_ = 0;
  std::vector<int> cell_of_;
  std::vector<std::vector<int>> cell_sites_;
};

/// Distribution of one disorder sample. Potentials are V = V+ - V- with
/// V+ ~ U[0, v_plus_max] and V- ~ U[0, v_minus_max] iid per site; link
/// disorder phases are U[-link_disorder, link_disorder] iid per edge.
struct DisorderModel {
  double v_plus_max = 0.0;
  double v_minus_max = 0.0;
  double link_disorder = 0.0;
  /// Uniform field along z (Landau gauge A = (-B y, 0, 0)); needs d >= 2.
  double magnetic_field = 0.0;
  /// Alternating hopping amplitudes 1 +/- delta along axis 0, strong bond first.
  double dimerization = 0.0;

  /// Ensemble-wide offset making H_omega + gamma >= 1:
  /// 1 + sup V- + 2d/a^2.
  double gamma(const LatticeGeometry& geometry) const;
  void validate(const LatticeGeometry& geometry) const;
};

/// One disorder sample omega, with everything needed to assemble H_omega.
struct Realization {
  std::uint64_t seed = 0;
  RVector v_plus;
  RVector v_minus;
  /// Per forward edge: hopping amplitude, deterministic background phase
  /// (magnetic field) and random phase. The reversed edge carries minus the phase.
  RVector hopping;
  RVector background_phase;
  RVector disorder_phase;
  double gamma = 1.0;

  RVector potential() const { return v_plus - v_minus; }
  double link_phase(int edge) const { return background_phase(edge) + disorder_phase(edge); }
  /// Throws InputError if the arrays do not match the geometry or hold non-finite values.
  void check(const LatticeGeometry& geometry) const;
  /// tau(a) omega: site and disorder arrays shifted by `shift` cells, background kept.
  Realization translated(const LatticeGeometry& geometry, std::span<const int> shift) const;
};

/// Per-realization seed: splitmix64 of the master seed mixed with the index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

Realization sample_realization(const LatticeGeometry& geometry, const DisorderModel& model,
                               std::uint64_t seed);

/// Landau-gauge background phases for a uniform field B, one per forward
/// edge. In periodic mode B must be quantized: B = 2 pi n / (Lx Ly a^2).
RVector landau_phases(const LatticeGeometry& geometry, double magnetic_field);

/// Electric field profile E(t) = e^{eta min(t,0)} E with switching integral
/// F(t) = (e^{eta min(t,0)}/eta + max(t,0)) E.
class FieldProfile {
public:
  FieldProfile(RVector field, double eta);

  const RVector& field() const { return field_; }
  double eta() const { return eta_; }
  bool is_zero() const { return field_.isZero(0.0); }

  RVector electric_field(double t) const;
  RVector switching_integral(double t) const;

private:
  RVector field_;
  double eta_;
};

/// Peierls matrix for the field shift F:
/// H[x, x+e_j] = -c_e e^{-i a (theta_e + F_j)} / a^2, H[x,x] = 2d/a^2 + V(x) + gamma.
CMatrix assemble_hamiltonian(const LatticeGeometry& geometry, const Realization& realization,
                             const RVector& field_shift);
HermitianOperator build_hamiltonian(const LatticeGeometry& geometry, const Realization& realization,
                                    const RVector& field_shift);
HermitianOperator build_hamiltonian(const LatticeGeometry& geometry, const Realization& realization);

/// Link-phased forward shift along `axis` without the field:
/// (S psi)(x) = c_e e^{-i a theta_e} psi(x + e_axis).
CMatrix link_shift(const LatticeGeometry& geometry, const Realization& realization, int axis);

/// Symmetric covariant difference D_j(F) = (-i / 2a)(e^{-i a F_j} S_j - h.c.).
/// The field derivative of the Hamiltonian is dH/dF_j = -2 D_j(F).
CMatrix covariant_derivative(const LatticeGeometry& geometry, const Realization& realization,
                             const RVector& field_shift, int axis);

/// Diagonal of G = e^{i F . x}.
CVector gauge_phases(const LatticeGeometry& geometry, const RVector& field_shift);
CVector gauge_unitary(const LatticeGeometry& geometry, const FieldProfile& profile, double t);
/// G A G* for diagonal G.
CMatrix gauge_conjugate(const CVector& phases, const CMatrix& a);

/// ||G(t) H(0) G(t)* - H(F(t))|| (operator norm). Open mode only.
double gauge_identity_residual(const LatticeGeometry& geometry, const Realization& realization,
                               const FieldProfile& profile, double t);

/// Magnetic translation U(a) = Lambda T_a, with (T_a psi)(x) = psi(x - a) and
/// Lambda the diagonal gauge that restores the background phases. Throws
/// UnsupportedOperation in open mode or when the shifted background is not
/// gauge equivalent to the original (flux holonomies change).
CMatrix magnetic_translation(const LatticeGeometry& geometry, const RVector& background_phase,
                             std::span<const int> shift);

/// ||U(a) H_omega U(a)* - H_{tau(a) omega}|| (operator norm).
double covariance_residual(const LatticeGeometry& geometry, const Realization& realization,
                           std::span<const int> shift);

/// Lattice -Delta (no phases, Dirichlet or periodic per geometry).
CMatrix lattice_laplacian(const LatticeGeometry& geometry);

/// True iff alpha(-Delta) + beta - V- >= 0.
bool verify_form_bound(const LatticeGeometry& geometry, const Realization& realization,
                       double alpha, double beta);

} // namespace liouvlab
