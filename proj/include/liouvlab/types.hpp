#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace liouvlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Malformed or inconsistent input (dimension mismatch, non-finite samples, bad ranges).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for the given geometry (e.g. translations in open mode).
class UnsupportedOperation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A numerical kernel failed (eigensolver breakdown, loss of hermiticity).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Which OpenMP path the ensemble and grid kernels take. `serial` is the
/// reference path kept for testing; both must produce bit-identical output.
enum class Exec { serial, parallel };

} // namespace liouvlab
