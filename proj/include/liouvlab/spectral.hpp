#pragma once

#include <functional>

#include "liouvlab/types.hpp"

namespace liouvlab {

/// Dense Hermitian matrix together with its eigendecomposition.
///
/// The factorization is computed once at construction and never mutated, so
/// an instance can be shared across threads. Eigenvalues are ascending and
/// the eigenvector matrix is unitary.
class HermitianOperator {
public:
  HermitianOperator() = default;

  /// Throws NumericalError if `matrix` is not Hermitian to 1e-13 (relative to
  /// its largest entry) or if the eigensolver does not converge.
  explicit HermitianOperator(CMatrix matrix);

  const CMatrix& matrix() const { return matrix_; }
  const RVector& eigenvalues() const { return eigenvalues_; }
  const CMatrix& eigenvectors() const { return eigenvectors_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  double min_eigenvalue() const { return eigenvalues_(0); }
  double max_eigenvalue() const { return eigenvalues_(eigenvalues_.size() - 1); }
  /// Operator norm, max |lambda|.
  double norm() const;

  /// f(H) = V diag(f(lambda)) V*.
  CMatrix apply(const std::function<Complex(double)>& f) const;
  /// H^{1/2}; requires H >= 0.
  CMatrix sqrt() const;
  /// H^{-1/2}; requires H > 0.
  CMatrix inv_sqrt() const;
  /// e^{-i dt H}.
  CMatrix propagate(double dt) const;
  /// (H + lambda)^{-1}.
  CMatrix resolvent(double lambda) const;

private:
  CMatrix matrix_;
  RVector eigenvalues_;
  CMatrix eigenvectors_;
};

/// Largest singular value.
double operator_norm(const CMatrix& m);

/// max |(M + M*)/2 - M| relative to max |M_ij|; 0 for the zero matrix.
double hermiticity_defect(const CMatrix& m);

/// ||U* U - I|| in operator norm.
double unitarity_defect(const CMatrix& u);

/// Sum of singular values.
double trace_norm(const CMatrix& m);

} // namespace liouvlab
