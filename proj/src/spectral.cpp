#include "liouvlab/spectral.hpp"

#include <cmath>
#include <sstream>

namespace liouvlab {

namespace {

CMatrix spectral_function(const CMatrix& vectors, const CVector& values) {
  return vectors * values.asDiagonal() * vectors.adjoint();
}

} // namespace

HermitianOperator::HermitianOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw InputError("HermitianOperator: matrix is not square");
  }
  const double defect = hermiticity_defect(matrix_);
  if (defect > 1e-13) {
    std::ostringstream msg;
    msg << "HermitianOperator: matrix is not Hermitian (relative defect " << defect << ")";
    throw NumericalError(msg.str());
  }
  // Symmetrize so the solver sees an exactly Hermitian input.
  CMatrix sym = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "HermitianOperator: eigendecomposition failed (n=" << sym.rows()
        << ", max |H_ij|=" << sym.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

double HermitianOperator::norm() const {
  return std::max(std::abs(min_eigenvalue()), std::abs(max_eigenvalue()));
}

CMatrix HermitianOperator::apply(const std::function<Complex(double)>& f) const {
  CVector values(eigenvalues_.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = f(eigenvalues_(i));
  return spectral_function(eigenvectors_, values);
}

CMatrix HermitianOperator::sqrt() const {
  if (min_eigenvalue() < 0.0) throw NumericalError("HermitianOperator::sqrt: negative spectrum");
  return apply([](double x) { return Complex(std::sqrt(x), 0.0); });
}

CMatrix HermitianOperator::inv_sqrt() const {
  if (min_eigenvalue() <= 0.0) throw NumericalError("HermitianOperator::inv_sqrt: nonpositive spectrum");
  return apply([](double x) { return Complex(1.0 / std::sqrt(x), 0.0); });
}

CMatrix HermitianOperator::propagate(double dt) const {
  if (dt == 0.0) return CMatrix::Identity(dim(), dim());
  return apply([dt](double x) { return std::exp(Complex(0.0, -dt * x)); });
}

CMatrix HermitianOperator::resolvent(double lambda) const {
  return apply([lambda](double x) { return Complex(1.0 / (x + lambda), 0.0); });
}

double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double hermiticity_defect(const CMatrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double unitarity_defect(const CMatrix& u) {
  return operator_norm(u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols()));
}

double trace_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

} // namespace liouvlab
