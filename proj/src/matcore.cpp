#include "hypobridge/matcore.hpp"

#include <cmath>
#include <string>

namespace hypobridge {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(who) + ": matrix has NaN or Inf entries");
  }
}

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw NonSquareError(std::string(who) + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

namespace {

// Pade approximant numerator/denominator split: after exit,
// (V + U)(V - U)^{-1} approximates exp(A) to order 13 + 13.
void expm_pade13(const Matrix& a, Matrix& u, Matrix& v) {
  static const double b[] = {64764752532480000., 32382376266240000.,
                             7771770303897600.,  1187353796428800.,
                             129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,
                             1323241920.,        40840800.,
                             960960.,            16380.,
                             182.,               1.};
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix tmp = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  tmp += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u = a * tmp;
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  const Index n = m.rows();
  if (n == 0) return Matrix(0, 0);

  // theta_13 from Higham's scaling-and-squaring analysis.
  const double theta13 = 5.371920351148152;
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  int squarings = 0;
  Matrix a = m;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    a /= std::ldexp(1.0, squarings);
  }

  Matrix u, v;
  expm_pade13(a, u, v);
  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

RankResult numerical_rank(const Matrix& m, double rel_tol) {
  require_finite(m, "numerical_rank");
  if (rel_tol <= 0.0 || rel_tol >= 1.0) {
    throw std::invalid_argument("numerical_rank: rel_tol must be in (0, 1)");
  }
  RankResult out;
  if (m.size() == 0 || m.lpNorm<Eigen::Infinity>() == 0.0) {
    out.rank = 0;
    out.basis = Matrix(m.rows(), 0);
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(rel_tol);
  out.rank = static_cast<int>(qr.rank());
  // First `rank` columns of Q span the column space in pivot order.
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), out.rank);
  out.basis = q;
  return out;
}

Matrix chol_psd(const Matrix& m, double jitter) {
  require_square(m, "chol_psd");
  require_finite(m, "chol_psd");
  const Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw AsymmetricError("chol_psd: matrix is not symmetric");
  }
  if (jitter < 0.0) {
    throw std::invalid_argument("chol_psd: jitter must be nonnegative");
  }

  Matrix a = 0.5 * (m + m.transpose());
  if (jitter > 0.0 && n > 0) {
    a += jitter * (a.trace() / static_cast<double>(n)) *
         Matrix::Identity(n, n);
  }

  const double pivot_tol = 1e-12 * scale;
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot < -pivot_tol) {
      throw NotPsdError("chol_psd: pivot " + std::to_string(pivot) +
                        " at index " + std::to_string(j) +
                        " below tolerance; matrix is not PSD");
    }
    if (pivot <= pivot_tol) {
      // Semidefinite direction: zero row/column in the factor.
      l(j, j) = 0.0;
      continue;
    }
    l(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on Legendre polynomials, nodes on [-1, 1] then mapped
  // to [0, 1]. Standard Golub-Welsch-free construction for modest n.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = 0.5 * (1.0 - x);  // descending roots -> ascending nodes
    rule.weights[i] = 1.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

}  // namespace hypobridge
