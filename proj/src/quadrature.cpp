#include "liouvlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

namespace liouvlab {

namespace {

QuadratureRule make_rule(int n) {
  // legendre_p_zeros returns the nonnegative zeros in ascending order.
  const auto pos = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (*it != 0.0) x.push_back(-*it);
  }
  for (double z : pos) x.push_back(z);
  QuadratureRule r;
  r.nodes = x;
  r.weights.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dp = boost::math::legendre_p_prime<double>(n, x[i]);
    r.weights[i] = 2.0 / ((1.0 - x[i] * x[i]) * dp * dp);
  }
  return r;
}

} // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw InputError("gauss_legendre: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  QuadratureRule r = gauss_legendre(n);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

Eigen::MatrixXd integration_matrix(int n, double lo, double hi) {
  const auto& rule = gauss_legendre(n);
  // Coefficients c_m = sum_k w_k P_m(x_k) (2m+1)/2 f_k, then integrate the
  // Legendre series with int_{-1}^x P_m = (P_{m+1} - P_{m-1}) / (2m+1).
  Eigen::MatrixXd p(n + 1, n);  // P_m(x_k)
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m <= n; ++m) p(m, k) = boost::math::legendre_p(m, rule.nodes[k]);
  }
  Eigen::MatrixXd coef(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) coef(m, k) = rule.weights[k] * p(m, k) * (2.0 * m + 1.0) / 2.0;
  Eigen::MatrixXd antideriv(n, n);  // row i: int_{-1}^{x_i} P_m
  for (int i = 0; i < n; ++i) {
    antideriv(i, 0) = rule.nodes[i] + 1.0;
    for (int m = 1; m < n; ++m) antideriv(i, m) = (p(m + 1, i) - p(m - 1, i)) / (2.0 * m + 1.0);
  }
  return 0.5 * (hi - lo) * antideriv * coef;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("loglog_slope: need >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(std::abs(x[i])), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace liouvlab
