#include "hypobridge/model.hpp"

#include <cmath>
#include <string>

namespace hypobridge {

int Filtration::level_of(Index coord) const {
  for (int k = 1; k <= n; ++k) {
    if (coord < dims[k - 1]) return k;
  }
  throw std::out_of_range("Filtration::level_of: coordinate out of range");
}

Index UBlocks::total_rows() const {
  Index r = 0;
  for (const auto& b : blocks) r += b.rows();
  return r;
}

Matrix UBlocks::u_hat(double r) const {
  const Index d = total_rows();
  const Index m = blocks.empty() ? 0 : blocks.front().cols();
  Matrix out(d, m);
  double rp = 1.0;
  for (size_t k = 0; k < blocks.size(); ++k) {
    out.middleRows(row_offset[k], blocks[k].rows()) = rp * blocks[k];
    rp *= r;
  }
  return out;
}

namespace {

Matrix controllability_matrix(const Matrix& A, const Matrix& B, int powers) {
  const Index d = A.rows();
  const Index m = B.cols();
  Matrix ctrl(d, powers * m);
  Matrix akb = B;
  for (int k = 0; k < powers; ++k) {
    ctrl.middleCols(k * m, m) = akb;
    if (k + 1 < powers) akb = A * akb;
  }
  return ctrl;
}

// True when span of the first dims[k-1] coordinate vectors already equals
// E_k for every k, i.e. all controllability columns vanish below row d_k.
bool standard_basis_adapted(const Matrix& A, const Matrix& B,
                            const std::vector<int>& dims, double tol) {
  const Index d = A.rows();
  Matrix akb = B;
  for (size_t k = 0; k < dims.size(); ++k) {
    const Index dk = dims[k];
    const double scale = std::max(1.0, akb.cwiseAbs().maxCoeff());
    if (dk < d &&
        akb.bottomRows(d - dk).cwiseAbs().maxCoeff() > tol * scale) {
      return false;
    }
    akb = A * akb;
  }
  return true;
}

}  // namespace

ModelSpec build_model(const Matrix& A, const Matrix& B, double rank_tol) {
  require_square(A, "build_model");
  require_finite(A, "build_model");
  require_finite(B, "build_model");
  if (B.rows() != A.rows()) {
    throw ShapeMismatchError(
        "build_model: B must have as many rows as A (got " +
        std::to_string(B.rows()) + ", expected " + std::to_string(A.rows()) +
        ")");
  }
  if (A.rows() == 0 || B.cols() == 0) {
    throw ShapeMismatchError("build_model: dimensions must be positive");
  }
  const int d = static_cast<int>(A.rows());
  RankResult rr =
      numerical_rank(controllability_matrix(A, B, d), rank_tol);
  if (rr.rank != d) {
    throw NotControllableError(
        "build_model: controllability matrix has rank " +
            std::to_string(rr.rank) + " < " + std::to_string(d),
        rr.rank);
  }
  return ModelSpec{A, B};
}

Filtration filtration(const ModelSpec& spec, double rank_tol) {
  const Index d = spec.d();
  Filtration filt;

  // Dimension ladder d_k = rank[B, AB, ..., A^{k-1}B]; n = first k with
  // d_k = d. Controllability guarantees n <= d.
  int prev = 0;
  for (int k = 1; k <= d; ++k) {
    RankResult rr = numerical_rank(
        controllability_matrix(spec.A, spec.B, k), rank_tol);
    if (rr.rank <= prev) {
      // Ladder stalled before reaching d: cannot happen for a validated
      // spec, but guard against inconsistent rank tolerances.
      throw NotControllableError(
          "filtration: dimension ladder stalled at " + std::to_string(prev),
          prev);
    }
    filt.dims.push_back(rr.rank);
    prev = rr.rank;
    if (rr.rank == d) {
      filt.n = k;
      break;
    }
  }

  if (standard_basis_adapted(spec.A, spec.B, filt.dims, rank_tol)) {
    filt.basis = Matrix::Identity(d, d);
    return filt;
  }

  // Incremental orthogonalization: level-k directions are the part of the
  // columns of A^{k-1}B orthogonal to E_{k-1}, orthonormalized with
  // deterministic pivoting.
  Matrix basis(d, d);
  Index filled = 0;
  Matrix akb = spec.B;
  for (int k = 1; k <= filt.n; ++k) {
    Matrix residual = akb;
    if (filled > 0) {
      const auto q = basis.leftCols(filled);
      residual -= q * (q.transpose() * residual);
      residual -= q * (q.transpose() * residual);  // re-orthogonalize
    }
    const Index want = filt.dims[k - 1] - filled;
    RankResult rr = numerical_rank(residual, rank_tol);
    if (rr.rank != want) {
      throw NotControllableError(
          "filtration: level " + std::to_string(k) + " rank " +
              std::to_string(rr.rank) + " does not match ladder step " +
              std::to_string(want),
          static_cast<int>(filled) + rr.rank);
    }
    basis.middleCols(filled, want) = rr.basis.leftCols(want);
    filled += want;
    akb = spec.A * akb;
  }
  filt.basis = basis;
  return filt;
}

UBlocks u_blocks(const ModelSpec& spec, const Filtration& filt) {
  UBlocks out;
  const Matrix bt = filt.basis.transpose();
  Matrix akb = spec.B;  // A^{k-1} B
  double factorial = 1.0;
  Index offset = 0;
  for (int k = 1; k <= filt.n; ++k) {
    if (k >= 2) factorial *= (k - 1);
    const Index rows = filt.block_rows(k);
    Matrix uk = (bt * akb).middleRows(offset, rows) / factorial;
    out.blocks.push_back(uk);
    out.row_offset.push_back(offset);
    offset += rows;
    akb = spec.A * akb;
  }
  return out;
}

Matrix principal_part(const ModelSpec& spec, const Filtration& filt) {
  const Index d = spec.d();
  const Matrix a_adapted =
      filt.basis.transpose() * spec.A * filt.basis;
  Matrix ahat = Matrix::Zero(d, d);
  for (int k = 2; k <= filt.n; ++k) {
    const Index r0 = filt.dims[k - 2];
    const Index rows = filt.block_rows(k);
    const Index c0 = (k >= 3) ? filt.dims[k - 3] : 0;
    const Index cols = filt.block_rows(k - 1);
    ahat.block(r0, c0, rows, cols) = a_adapted.block(r0, c0, rows, cols);
  }
  return ahat;
}

Matrix adjoint_power(const ModelSpec& spec, int k) {
  if (k < 0) throw std::invalid_argument("adjoint_power: k must be >= 0");
  Matrix akb = spec.B;
  for (int i = 0; i < k; ++i) akb = spec.A * akb;
  return (k % 2 == 0) ? akb : Matrix(-akb);
}

Matrix adapted_diffusion(const ModelSpec& spec, const Filtration& filt) {
  Matrix b = filt.basis.transpose() * spec.B;
  const Index d1 = filt.dims[0];
  if (d1 < spec.d()) b.bottomRows(spec.d() - d1).setZero();
  return b;
}

Vector d_scaling(const Filtration& filt, double eps) {
  const Index d = filt.dims.back();
  Vector diag(d);
  for (Index j = 0; j < d; ++j) {
    diag(j) = std::pow(eps, filt.level_of(j) - 1);
  }
  return diag;
}

Vector j_scaling(const Filtration& filt, double t) {
  const Index d = filt.dims.back();
  Vector diag(d);
  for (Index j = 0; j < d; ++j) {
    diag(j) = std::pow(t, filt.level_of(j) - 0.5);
  }
  return diag;
}

}  // namespace hypobridge
