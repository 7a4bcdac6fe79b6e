#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "immse/linalg.hpp"

namespace immse::testing {

// R(D) for dX = aX dt + b dW: the trace constraint binds below the
// open-loop variance b²/(2|a|) and the curve is zero beyond it.
inline double scalar_rate(double a, double b, double d) {
  const double open_loop =
      a < 0.0 ? b * b / (-2.0 * a) : std::numeric_limits<double>::infinity();
  return a + b * b / (2.0 * std::min(d, open_loop));
}

inline Matrix random_matrix(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(g);
  return m;
}

inline Matrix random_orthogonal(std::mt19937_64& g, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(g, n, n));
  return qr.householderQ();
}

inline SymMatrix random_spd(std::mt19937_64& g, Eigen::Index n) {
  const Matrix m = random_matrix(g, n, n);
  return SymMatrix::symmetrized(m * m.transpose() + Matrix::Identity(n, n));
}

}  // namespace immse::testing
