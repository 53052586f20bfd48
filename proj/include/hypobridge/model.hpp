#pragma once

#include <vector>

#include "hypobridge/matcore.hpp"

namespace hypobridge {

/// A linear-drift, constant-diffusion model dx = eps*A*x dt + sqrt(eps)*B dW.
/// Construction via build_model guarantees the controllability rank
/// condition rank[B, AB, ..., A^{d-1}B] = d.
struct ModelSpec {
  Matrix A;  // d x d drift
  Matrix B;  // d x m diffusion
  Index d() const { return A.rows(); }
  Index m() const { return B.cols(); }
};

/// Increasing subspace ladder E_1 c E_2 c ... c E_n = R^d, where E_k is the
/// column span of [B, AB, ..., A^{k-1}B], together with an orthonormal basis
/// whose first dims[k-1] columns span E_k.
struct Filtration {
  int n = 0;                  // minimal power count with E_n = R^d
  std::vector<int> dims;      // dims[k-1] = dim E_k, strictly increasing to d
  Matrix basis;               // d x d orthogonal
  int level_of(Index coord) const;   // block index k (1-based) of coordinate
  Index block_rows(int k) const {    // dims[k-1] - dims[k-2]
    return dims[k - 1] - (k >= 2 ? dims[k - 2] : 0);
  }
};

/// Leading coefficient blocks u_k of e^{eps r A} B in the adapted basis:
/// block k of the expansion carries eps^{k-1} r^{k-1} u_k.
struct UBlocks {
  std::vector<Matrix> blocks;            // u_k is (d_k - d_{k-1}) x m
  std::vector<Index> row_offset;         // start row of block k in R^d
  Index total_rows() const;
  /// Stacks r^{k-1} u_k into a d x m matrix.
  Matrix u_hat(double r) const;
};

ModelSpec build_model(const Matrix& A, const Matrix& B,
                      double rank_tol = 1e-10);

Filtration filtration(const ModelSpec& spec, double rank_tol = 1e-10);

UBlocks u_blocks(const ModelSpec& spec, const Filtration& filt);

/// Subdiagonal-block truncation of A expressed in the adapted basis. Only
/// the (k+1, k) blocks survive; e^{r Ahat} * (basis^T B) recovers u_hat(r).
Matrix principal_part(const ModelSpec& spec, const Filtration& filt);

/// (-1)^k A^k B, the coefficient matrix of the k-fold drift bracket applied
/// to the constant diffusion fields.
Matrix adjoint_power(const ModelSpec& spec, int k);

/// basis^T B with the rows below dim E_1 forced to exact zero (they vanish
/// identically in the adapted basis).
Matrix adapted_diffusion(const ModelSpec& spec, const Filtration& filt);

/// Diagonal of D_eps: entry eps^{k-1} for coordinates at filtration level k.
Vector d_scaling(const Filtration& filt, double eps);

/// Diagonal of J_t: entry t^{k-1/2} for coordinates at filtration level k.
Vector j_scaling(const Filtration& filt, double t);

}  // namespace hypobridge
