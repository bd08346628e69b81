#include "liouvlab/reference/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

namespace liouvlab::reference {

CMatrix expm_pade(const CMatrix& h, double dt) {
  const CMatrix a = Complex(0.0, -dt) * h;
  return a.exp();
}

CMatrix sqrtm_schur(const CMatrix& h) { return h.sqrt(); }

std::vector<double> path_laplacian_eigenvalues(int sites) {
  std::vector<double> out;
  for (int k = 1; k <= sites; ++k) out.push_back(2.0 - 2.0 * std::cos(k * std::numbers::pi / (sites + 1)));
  return out;
}

CMatrix random_matrix(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  CMatrix m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = Complex(d(rng), d(rng));
  return m;
}

CMatrix random_hermitian(int n, unsigned long long seed) {
  const CMatrix m = random_matrix(n, seed);
  return 0.5 * (m + m.adjoint());
}

CVector random_vector(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(d(rng), d(rng));
  return v / v.norm();
}

} // namespace liouvlab::reference
