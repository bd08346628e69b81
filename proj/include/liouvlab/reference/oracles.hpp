#pragma once

#include <vector>

#include "liouvlab/types.hpp"

namespace liouvlab::reference {

/// e^{-i dt H} by Pade scaling and squaring (no eigendecomposition).
CMatrix expm_pade(const CMatrix& h, double dt);

/// Principal square root by the Schur method.
CMatrix sqrtm_schur(const CMatrix& h);

/// Eigenvalues 2 - 2 cos(k pi / (L + 1)), k = 1..L, of the open path Laplacian.
std::vector<double> path_laplacian_eigenvalues(int sites);

/// Random Hermitian matrix with iid Gaussian entries, fixed seed.
CMatrix random_hermitian(int n, unsigned long long seed);
/// Random complex matrix with iid Gaussian entries, fixed seed.
CMatrix random_matrix(int n, unsigned long long seed);
/// Random unit vector.
CVector random_vector(int n, unsigned long long seed);

} // namespace liouvlab::reference
