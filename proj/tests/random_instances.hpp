#pragma once

// Test-only generators for random matrices and control instances.

#include <cstdint>
#include <random>

#include "rsmlqr/matkit.hpp"
#include "rsmlqr/problem.hpp"

namespace rsmlqr::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Index n) {
  const Matrix g = random_matrix(rng, n, n);
  return g + g.transpose();
}

inline Matrix random_gram(std::mt19937_64& rng, Index n, double shift = 0.1) {
  const Matrix g = random_matrix(rng, n, n);
  return g.transpose() * g + shift * Matrix::Identity(n, n);
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Index random_index(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Random Hurwitz matrix whose eigenvalues lie in [-hi, -lo] (real parts).
inline Matrix random_hurwitz(std::mt19937_64& rng, Index n, double lo = 0.2, double hi = 3.0) {
  const Matrix t = random_matrix(rng, n, n);
  Eigen::EigenSolver<Matrix> es(t, false);
  const double max_re = es.eigenvalues().real().maxCoeff();
  const double min_re = es.eigenvalues().real().minCoeff();
  const double spread = std::max(max_re - min_re, 1e-9);
  std::uniform_real_distribution<double> target(lo, hi);
  const double top = -target(rng) + 0.0;
  // Scale so the spectrum fits inside [-(hi), top], then shift.
  const double scale = std::min(1.0, (hi - (-top)) / spread);
  return scale * t + (top - scale * max_re) * Matrix::Identity(n, n);
}

}  // namespace rsmlqr::testing
