#pragma once

#include <vector>

#include "liouvlab/types.hpp"

namespace liouvlab {

/// Gauss-Legendre rule on [lo, hi].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule on [-1, 1], nodes ascending. Cached per n.
const QuadratureRule& gauss_legendre(int n);
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Matrix Q with (Q f)_i ~ int_{lo}^{x_i} f for f sampled at the n Gauss
/// nodes x_i of [lo, hi]; exact for polynomials of degree < n.
Eigen::MatrixXd integration_matrix(int n, double lo, double hi);

/// Slope of log|y| against log|x| by least squares.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Two-point Richardson extrapolation for a first-order quantity sampled
/// at h and h/2: 2 X(h/2) - X(h).
template <class T>
T richardson(const T& coarse, const T& fine) {
  return 2.0 * fine - coarse;
}

} // namespace liouvlab
