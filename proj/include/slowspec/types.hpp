#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slowspec {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using Index = Eigen::Index;

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, file format, or argument values.
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure at runtime (divergence, singular matrices, ...).
struct NumericError : Error {
  using Error::Error;
};

/// Uniform 1D quadrature grid with trapezoidal weights.
///
/// weights() are positive and sum to hi - lo; endpoint weights are half the
/// interior spacing.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  Index n = 0;
  Vector nodes;
  Vector weights;

  static Grid uniform(double lo, double hi, Index n) {
    if (!(lo < hi)) throw ConfigError("Grid: require lo < hi");
    if (n < 3) throw ConfigError("Grid: require at least 3 nodes");
    Grid g;
    g.lo = lo;
    g.hi = hi;
    g.n = n;
    g.nodes = Vector::LinSpaced(n, lo, hi);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    g.weights = Vector::Constant(n, h);
    g.weights(0) *= 0.5;
    g.weights(n - 1) *= 0.5;
    return g;
  }

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
};

}  // namespace slowspec
