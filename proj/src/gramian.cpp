#include "hypobridge/gramian.hpp"

#include <cmath>
#include <string>

namespace hypobridge {

Matrix gramian_integral(const Matrix& M, const Matrix& B, double t) {
  const Index d = M.rows();
  if (t == 0.0) return Matrix::Zero(d, d);
  Matrix aug = Matrix::Zero(2 * d, 2 * d);
  aug.topLeftCorner(d, d) = -t * M;
  aug.topRightCorner(d, d) = t * B * B.transpose();
  aug.bottomRightCorner(d, d) = t * M.transpose();
  const Matrix f = expm(aug);
  // F11 = e^{-tM}, F12 = Gamma_t e^{tM^T}, so Gamma_t = F12 F11^T.
  Matrix gamma = f.topRightCorner(d, d) * f.topLeftCorner(d, d).transpose();
  return 0.5 * (gamma + gamma.transpose());
}

GramianSet gramian(const ModelSpec& spec, double eps, double t) {
  if (eps <= 0.0) throw std::invalid_argument("gramian: eps must be > 0");
  if (t < 0.0 || t > 1.0) {
    throw std::invalid_argument("gramian: t must lie in [0, 1]");
  }
  GramianSet gs;
  gs.eps = eps;
  gs.t = t;
  gs.gamma = gramian_integral(eps * spec.A, spec.B, t);
  gs.exp_tA = expm(eps * t * spec.A);
  return gs;
}

Matrix scaled_drift(const ModelSpec& spec, const Filtration& filt,
                    double eps) {
  const Index d = spec.d();
  const Matrix a_adapted = filt.basis.transpose() * spec.A * filt.basis;
  Matrix a_scaled = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const int ki = filt.level_of(i);
    for (Index j = 0; j < d; ++j) {
      const int kj = filt.level_of(j);
      if (ki >= kj + 2) continue;  // vanishes identically in adapted basis
      a_scaled(i, j) = a_adapted(i, j) * std::pow(eps, kj - ki + 1);
    }
  }
  return a_scaled;
}

namespace {

// Solves G X = R for SPD G via Cholesky; the scaled Gramians this is used
// with stay well-conditioned uniformly in eps.
Matrix spd_solve(const Matrix& g, const Matrix& rhs, const char* who) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) {
    throw SingularGramianError(std::string(who) +
                               ": Gramian is not positive definite");
  }
  return llt.solve(rhs);
}

}  // namespace

Matrix rescaled_alpha(const ModelSpec& spec, const Filtration& filt,
                      double eps, double t) {
  const Index d = spec.d();
  if (t == 0.0) return Matrix::Zero(d, d);
  if (t == 1.0) return Matrix::Identity(d, d);
  const Matrix a_sc = scaled_drift(spec, filt, eps);
  const Matrix b_ad = adapted_diffusion(spec, filt);
  const Matrix g_t = gramian_integral(a_sc, b_ad, t);
  const Matrix g_1 = gramian_integral(a_sc, b_ad, 1.0);
  const Matrix rhs = expm(-a_sc);
  return expm(t * a_sc) * g_t * spd_solve(g_1, rhs, "rescaled_alpha");
}

Matrix alpha(const ModelSpec& spec, const Filtration& filt, double eps,
             double t) {
  if (eps <= 0.0) throw std::invalid_argument("alpha: eps must be > 0");
  if (t < 0.0 || t > 1.0) {
    throw std::invalid_argument("alpha: t must lie in [0, 1]");
  }
  const Index d = spec.d();
  if (t == 0.0) return Matrix::Zero(d, d);
  if (t == 1.0) return Matrix::Identity(d, d);
  const Vector dv = d_scaling(filt, eps);
  const Matrix m = rescaled_alpha(spec, filt, eps, t);
  // alpha = Q D m D^-1 Q^T
  Matrix scaled = dv.asDiagonal() * m * dv.cwiseInverse().asDiagonal();
  return filt.basis * scaled * filt.basis.transpose();
}

Matrix alpha(const ModelSpec& spec, double eps, double t) {
  return alpha(spec, filtration(spec), eps, t);
}

Matrix phi_path(const ModelSpec& spec, double eps, const Vector& x,
                const Vector& y, const std::vector<double>& grid) {
  const Index d = spec.d();
  if (x.size() != d || y.size() != d) {
    throw ShapeMismatchError("phi_path: x and y must have dimension d");
  }
  const Filtration filt = filtration(spec);
  const Vector exp1x = expm(eps * spec.A) * x;
  Matrix path(static_cast<Index>(grid.size()), d);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const Vector flow = expm(eps * t * spec.A) * x;
    path.row(i) =
        (flow + alpha(spec, filt, eps, t) * (y - exp1x)).transpose();
  }
  return path;
}

double hamiltonian_verify(const ModelSpec& spec, double eps, const Vector& x,
                          const Vector& y, int steps) {
  if (steps < 100) {
    throw std::invalid_argument("hamiltonian_verify: steps must be >= 100");
  }
  const Matrix bbt = spec.B * spec.B.transpose();
  const Matrix at = spec.A.transpose();

  // Minimum-energy initial covector: p_0 = Gamma_1^-1 (e^{-eps A} y - x).
  const Matrix gamma1 = gramian_integral(eps * spec.A, spec.B, 1.0);
  Eigen::LLT<Matrix> llt(gamma1);
  if (llt.info() != Eigen::Success) {
    throw SingularGramianError("hamiltonian_verify: Gamma_1 not invertible");
  }
  const Vector p0 = llt.solve(expm(-eps * spec.A) * y - x);

  std::vector<double> grid(steps + 1);
  for (int i = 0; i <= steps; ++i) grid[i] = double(i) / steps;
  const Matrix phi = phi_path(spec, eps, x, y, grid);

  const double h = 1.0 / steps;
  Vector q = x, p = p0;
  auto fq = [&](const Vector& qv, const Vector& pv) -> Vector {
    return eps * (spec.A * qv) + bbt * pv;
  };
  auto fp = [&](const Vector& pv) -> Vector { return -eps * (at * pv); };

  double max_dev = (q - phi.row(0).transpose()).cwiseAbs().maxCoeff();
  for (int i = 0; i < steps; ++i) {
    const Vector k1q = fq(q, p), k1p = fp(p);
    const Vector k2q = fq(q + 0.5 * h * k1q, p + 0.5 * h * k1p);
    const Vector k2p = fp(p + 0.5 * h * k1p);
    const Vector k3q = fq(q + 0.5 * h * k2q, p + 0.5 * h * k2p);
    const Vector k3p = fp(p + 0.5 * h * k2p);
    const Vector k4q = fq(q + h * k3q, p + h * k3p);
    const Vector k4p = fp(p + h * k3p);
    q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    const double dev =
        (q - phi.row(i + 1).transpose()).cwiseAbs().maxCoeff();
    max_dev = std::max(max_dev, dev);
  }
  return max_dev;
}

}  // namespace hypobridge
