#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hypobridge/errors.hpp"

namespace hypobridge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* who);
void require_square(const Matrix& m, const char* who);

/// Matrix exponential by scaling-and-squaring with a (13,13) diagonal Pade
/// approximant. Relative accuracy is at the rounding level for the moderate
/// norms this library produces (||M|| <= ~10 before scaling).
Matrix expm(const Matrix& m);

struct RankResult {
  int rank = 0;
  /// Orthonormal basis of the column space, one column per retained
  /// direction, in pivot order (largest residual norm first, ties broken by
  /// lowest column index).
  Matrix basis;
};

/// Numerical rank via column-pivoted Householder QR. A direction is retained
/// while its pivot exceeds rel_tol times the largest pivot.
RankResult numerical_rank(const Matrix& m, double rel_tol = 1e-10);

/// Cholesky factor L (lower triangular, nonnegative diagonal) of the
/// positive semidefinite matrix M + jitter * (trace(M)/n) * I. Pivots within
/// [-tol, tol] of zero are treated as exactly zero so that semidefinite
/// matrices (e.g. grid covariances pinned at the endpoint) factor cleanly.
/// Throws NotPsdError when a pivot is more negative than the tolerance
/// allows, and AsymmetricError when M is not symmetric to 1e-10 relative.
Matrix chol_psd(const Matrix& m, double jitter = 0.0);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [0, 1]; exact for polynomials of
/// degree <= 2n - 1.
QuadratureRule gauss_legendre(int n);

}  // namespace hypobridge
