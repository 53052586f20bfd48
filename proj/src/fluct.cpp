#include "hypobridge/fluct.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hypobridge/rng.hpp"

namespace hypobridge {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

// (k-1)!(l-1)!/(k+l-1)! without forming the factorials.
double beta_coeff(int k, int l) { return 1.0 / (binom(k + l - 1, k - 1) * l); }

// int_0^a (a-s)^{k-1} (b-s)^{l-1} ds for 0 <= a <= b, by expanding
// (b-s)^{l-1} around (a-s); every summand is nonnegative.
double kernel_moment(int k, int l, double a, double b) {
  double sum = 0.0;
  for (int j = 0; j <= l - 1; ++j) {
    sum += binom(l - 1, j) * std::pow(b - a, l - 1 - j) *
           std::pow(a, k + j) / (k + j);
  }
  return sum;
}

}  // namespace

Scaling scaling(const Filtration& filt) { return Scaling{filt}; }

Matrix u_hat(const UBlocks& u, double r) { return u.u_hat(r); }

Matrix v_matrix(const UBlocks& u) {
  const Index d = u.total_rows();
  const int n = static_cast<int>(u.blocks.size());
  Matrix v(d, d);
  for (int k = 1; k <= n; ++k) {
    for (int l = 1; l <= n; ++l) {
      const double sign = (l % 2 == 1) ? 1.0 : -1.0;
      v.block(u.row_offset[k - 1], u.row_offset[l - 1], u.blocks[k - 1].rows(),
              u.blocks[l - 1].rows()) =
          sign * beta_coeff(k, l) * u.blocks[k - 1] *
          u.blocks[l - 1].transpose();
    }
  }
  return v;
}

Matrix v_from_integral(const UBlocks& u, int quad_order) {
  if (quad_order < 20) {
    throw std::invalid_argument("v_from_integral: quad_order must be >= 20");
  }
  const Index d = u.total_rows();
  Matrix v = Matrix::Zero(d, d);
  const QuadratureRule rule = gauss_legendre(quad_order);
  for (int i = 0; i < quad_order; ++i) {
    const double s = rule.nodes[i];
    v += rule.weights[i] * u.u_hat(1.0 - s) * u.u_hat(-s).transpose();
  }
  return v;
}

namespace {

using LongMatrix =
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Ruiz-style two-sided equilibration: returns diagonal scalings r, c with
// r V c having rows and columns of roughly unit infinity norm.
void ruiz_equilibrate(const Matrix& v, Vector& r, Vector& c) {
  const Index n = v.rows();
  r = Vector::Ones(n);
  c = Vector::Ones(n);
  Matrix w = v;
  for (int iter = 0; iter < 6; ++iter) {
    for (Index i = 0; i < n; ++i) {
      const double rn = w.row(i).cwiseAbs().maxCoeff();
      if (rn > 0.0) {
        const double s = 1.0 / std::sqrt(rn);
        w.row(i) *= s;
        r(i) *= s;
      }
    }
    for (Index j = 0; j < n; ++j) {
      const double cn = w.col(j).cwiseAbs().maxCoeff();
      if (cn > 0.0) {
        const double s = 1.0 / std::sqrt(cn);
        w.col(j) *= s;
        c(j) *= s;
      }
    }
  }
}

}  // namespace

Matrix v_inverse(const Matrix& v, double* cond_out) {
  require_square(v, "v_inverse");
  require_finite(v, "v_inverse");

  Vector r, c;
  ruiz_equilibrate(v, r, c);
  LongMatrix w = (r.asDiagonal() * v * c.asDiagonal()).cast<long double>();

  Eigen::FullPivLU<LongMatrix> lu(w);
  if (!lu.isInvertible()) {
    throw IllConditionedError("v_inverse: matrix is numerically singular",
                              std::numeric_limits<double>::infinity());
  }
  LongMatrix winv = lu.inverse();
  const double cond =
      static_cast<double>(w.cwiseAbs().colwise().sum().maxCoeff() *
                          winv.cwiseAbs().colwise().sum().maxCoeff());
  if (cond_out) *cond_out = cond;
  if (cond > 1e12) {
    throw IllConditionedError(
        "v_inverse: equilibrated condition estimate " + std::to_string(cond) +
            " exceeds 1e12",
        cond);
  }
  // V^-1 = c * (r V c)^-1 * r.
  return c.asDiagonal() * winv.cast<double>() * r.asDiagonal();
}

Matrix hankel_v_inverse(int d) {
  if (d < 1 || d > 8) {
    throw UnsupportedDimensionError(
        "hankel_v_inverse: closed form is exact in double only for d <= 8");
  }
  Matrix inv(d, d);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      double fact = 1.0;
      for (int p = 2; p < i; ++p) fact *= p;        // (i-1)!
      for (int p = 2; p <= j; ++p) fact *= p;       // j!
      double sum = 0.0;
      for (int k = 0; k <= i - 1; ++k) {
        sum += binom(d - i + k, j - 1) * binom(d + k - 1, k);
      }
      const double sign = ((d + j) % 2 == 0) ? 1.0 : -1.0;
      inv(i - 1, j - 1) =
          sign * fact * binom(d - 1, i - 1) * binom(d + j - 1, j) * sum;
    }
  }
  return inv;
}

Matrix limit_mean_map(const Scaling& s, const Matrix& v, const Matrix& vinv,
                      double t) {
  const Vector j = s.j_t(t);
  return j.asDiagonal() * v * j.asDiagonal() * vinv;
}

namespace {

// K(a, b) for a <= b; both block arguments of the limit covariance kernel.
Matrix kernel_matrix(const UBlocks& u, double a, double b) {
  const Index d = u.total_rows();
  const int n = static_cast<int>(u.blocks.size());
  Matrix k_mat(d, d);
  for (int k = 1; k <= n; ++k) {
    for (int l = 1; l <= n; ++l) {
      k_mat.block(u.row_offset[k - 1], u.row_offset[l - 1],
                  u.blocks[k - 1].rows(), u.blocks[l - 1].rows()) =
          kernel_moment(k, l, a, b) * u.blocks[k - 1] *
          u.blocks[l - 1].transpose();
    }
  }
  return k_mat;
}

Matrix kernel_any(const UBlocks& u, double a, double b) {
  if (a <= b) return kernel_matrix(u, a, b);
  return kernel_matrix(u, b, a).transpose();
}

Matrix assemble_pinned_cov(const Matrix& k12, const Matrix& k1e,
                           const Matrix& ke2, const Matrix& kee,
                           const Matrix& m1, const Matrix& m2) {
  return k12 - k1e * m2.transpose() - m1 * ke2 +
         m1 * kee * m2.transpose();
}

}  // namespace

Matrix limit_cov(const UBlocks& u, const Scaling& s, double t1, double t2) {
  if (t1 > t2) throw BadTimeOrderError("limit_cov: requires t1 <= t2");
  if (t1 < 0.0 || t2 > 1.0) {
    throw std::invalid_argument("limit_cov: times must lie in [0, 1]");
  }
  const Matrix v = v_matrix(u);
  const Matrix vinv = v_inverse(v);
  const Matrix m1 = limit_mean_map(s, v, vinv, t1);
  const Matrix m2 = limit_mean_map(s, v, vinv, t2);
  return assemble_pinned_cov(kernel_matrix(u, t1, t2),
                             kernel_matrix(u, t1, 1.0),
                             kernel_any(u, 1.0, t2),
                             kernel_matrix(u, 1.0, 1.0), m1, m2);
}

Matrix rescaled_cov(const ModelSpec& spec, const Filtration& filt,
                    double eps, double t1, double t2) {
  if (eps <= 0.0) throw std::invalid_argument("rescaled_cov: eps must be > 0");
  if (t1 > t2) throw BadTimeOrderError("rescaled_cov: requires t1 <= t2");
  if (t1 < 0.0 || t2 > 1.0) {
    throw std::invalid_argument("rescaled_cov: times must lie in [0, 1]");
  }
  const Matrix a_sc = scaled_drift(spec, filt, eps);
  const Matrix b_ad = adapted_diffusion(spec, filt);

  auto kernel = [&](double a, double b) -> Matrix {  // a <= b
    return expm(a * a_sc) * gramian_integral(a_sc, b_ad, a) *
           expm(b * a_sc).transpose();
  };
  const Matrix m1 = rescaled_alpha(spec, filt, eps, t1);
  const Matrix m2 = rescaled_alpha(spec, filt, eps, t2);
  return assemble_pinned_cov(kernel(t1, t2), kernel(t1, 1.0),
                             kernel(t2, 1.0).transpose(), kernel(1.0, 1.0),
                             m1, m2);
}

Matrix rescaled_cov(const ModelSpec& spec, double eps, double t1, double t2) {
  return rescaled_cov(spec, filtration(spec), eps, t1, t2);
}

AlphaExpansion alpha_expansion(const ModelSpec& spec, const Filtration& filt,
                               double t, double eps0) {
  if (eps0 <= 0.0) {
    throw std::invalid_argument("alpha_expansion: eps0 must be > 0");
  }
  const Matrix g0 = rescaled_alpha(spec, filt, eps0, t);
  const Matrix g1 = rescaled_alpha(spec, filt, eps0 / 2.0, t);
  const Matrix g2 = rescaled_alpha(spec, filt, eps0 / 4.0, t);

  auto richardson = [](const Matrix& a, const Matrix& b,
                       const Matrix& c) -> Matrix {
    const Matrix r01 = 2.0 * b - a;
    const Matrix r12 = 2.0 * c - b;
    return (4.0 * r12 - r01) / 3.0;
  };

  AlphaExpansion out;
  out.leading = richardson(g0, g1, g2);

  const UBlocks u = u_blocks(spec, filt);
  const Matrix v = v_matrix(u);
  const Matrix vinv = v_inverse(v);
  const Matrix m = limit_mean_map(Scaling{filt}, v, vinv, t);
  const Matrix c0 = (g0 - m) / eps0;
  const Matrix c1 = (g1 - m) / (eps0 / 2.0);
  const Matrix c2 = (g2 - m) / (eps0 / 4.0);
  out.correction = richardson(c0, c1, c2);
  return out;
}

Matrix FluctuationLaw::mean_map(double t) const {
  return limit_mean_map(scale, V, Vinv, t);
}

Matrix FluctuationLaw::cov(double t1, double t2) const {
  if (t1 > t2) {
    throw BadTimeOrderError("FluctuationLaw::cov: requires t1 <= t2");
  }
  const Matrix m1 = mean_map(t1);
  const Matrix m2 = mean_map(t2);
  return assemble_pinned_cov(kernel_matrix(ublocks, t1, t2),
                             kernel_matrix(ublocks, t1, 1.0),
                             kernel_any(ublocks, 1.0, t2),
                             kernel_matrix(ublocks, 1.0, 1.0), m1, m2);
}

FluctuationLaw fluctuation_law(const ModelSpec& spec, double rank_tol) {
  FluctuationLaw law;
  const Filtration filt = filtration(spec, rank_tol);
  law.ublocks = u_blocks(spec, filt);
  law.scale = Scaling{filt};
  law.V = v_matrix(law.ublocks);
  law.Vinv = v_inverse(law.V, &law.v_cond);
  return law;
}

std::vector<Matrix> sample_limit(const FluctuationLaw& law,
                                 const std::vector<double>& grid,
                                 int n_paths, std::uint64_t seed,
                                 double jitter) {
  if (n_paths < 1) {
    throw std::invalid_argument("sample_limit: n_paths must be >= 1");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0 || grid[i] > 1.0 ||
        (i > 0 && grid[i] <= grid[i - 1])) {
      throw BadGridError(
          "sample_limit: grid must be strictly increasing in (0, 1]");
    }
  }
  const Index d = law.ublocks.total_rows();
  const Index n = static_cast<Index>(grid.size());
  Matrix joint(n * d, n * d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const Matrix block = law.cov(grid[i], grid[j]);
      joint.block(i * d, j * d, d, d) = block;
      if (j > i) joint.block(j * d, i * d, d, d) = block.transpose();
    }
  }
  joint = 0.5 * (joint + joint.transpose()).eval();
  const Matrix l = chol_psd(joint, jitter);

  std::vector<Matrix> paths(static_cast<size_t>(n_paths));
  for (int k = 0; k < n_paths; ++k) {
    GaussianStream stream(seed, static_cast<std::uint64_t>(k));
    const Vector z = l * stream.next_vector(n * d);
    Matrix path(n, d);
    for (Index i = 0; i < n; ++i) {
      path.row(i) = z.segment(i * d, d).transpose();
    }
    paths[static_cast<size_t>(k)] = std::move(path);
  }
  return paths;
}

ConvergenceReport convergence_report(const ModelSpec& spec,
                                     const std::vector<double>& eps_list,
                                     const std::vector<double>& grid) {
  if (eps_list.size() < 3) {
    throw std::invalid_argument(
        "convergence_report: need at least 3 eps values");
  }
  for (size_t i = 1; i < eps_list.size(); ++i) {
    if (eps_list[i] >= eps_list[i - 1]) {
      throw std::invalid_argument(
          "convergence_report: eps_list must be strictly decreasing");
    }
  }

  ConvergenceReport rep;
  rep.eps = eps_list;
  rep.grid = grid;

  const Filtration filt = filtration(spec);
  const UBlocks u = u_blocks(spec, filt);
  const Scaling sc{filt};
  const Matrix v = v_matrix(u);
  const Matrix vinv = v_inverse(v);
  const size_t ng = grid.size();

  // Limit quantities are eps-independent: precompute per grid time.
  std::vector<Matrix> m_lim(ng), k_lim_end(ng);
  for (size_t i = 0; i < ng; ++i) {
    m_lim[i] = limit_mean_map(sc, v, vinv, grid[i]);
    k_lim_end[i] = kernel_matrix(u, grid[i], 1.0);
  }
  const Matrix k_lim_11 = kernel_matrix(u, 1.0, 1.0);

  const Matrix b_ad = adapted_diffusion(spec, filt);
  const Vector x_probe = Vector::Zero(spec.d());

  for (double eps : eps_list) {
    const Matrix a_sc = scaled_drift(spec, filt, eps);
    std::vector<Matrix> g_sc(ng), exp_sc(ng), m_eps(ng);
    for (size_t i = 0; i < ng; ++i) {
      g_sc[i] = gramian_integral(a_sc, b_ad, grid[i]);
      exp_sc[i] = expm(grid[i] * a_sc);
      m_eps[i] = rescaled_alpha(spec, filt, eps, grid[i]);
    }
    const Matrix exp_1 = expm(a_sc);
    const Matrix g_1 = gramian_integral(a_sc, b_ad, 1.0);
    const Matrix k_eps_11 = exp_1 * g_1 * exp_1.transpose();

    Matrix errs = Matrix::Zero(static_cast<Index>(ng),
                               static_cast<Index>(ng));
    double sup = 0.0;
    for (size_t i = 0; i < ng; ++i) {
      const Matrix k_i_end = exp_sc[i] * g_sc[i] * exp_1.transpose();
      for (size_t j = i; j < ng; ++j) {
        const Matrix k_ij = exp_sc[i] * g_sc[i] * exp_sc[j].transpose();
        const Matrix k_j_end = exp_sc[j] * g_sc[j] * exp_1.transpose();
        const Matrix cov_eps = assemble_pinned_cov(
            k_ij, k_i_end, k_j_end.transpose(), k_eps_11, m_eps[i],
            m_eps[j]);
        const Matrix cov_lim = assemble_pinned_cov(
            kernel_matrix(u, grid[i], grid[j]), k_lim_end[i],
            k_lim_end[j].transpose(), k_lim_11, m_lim[i], m_lim[j]);
        const double err =
            (cov_eps - cov_lim).jacobiSvd().singularValues()(0);
        errs(static_cast<Index>(i), static_cast<Index>(j)) = err;
        errs(static_cast<Index>(j), static_cast<Index>(i)) = err;
        sup = std::max(sup, err);
      }
    }
    rep.pair_errors.push_back(std::move(errs));
    rep.sup_cov_error.push_back(sup);

    // Mean check: the bridge mean is phi by construction, so the scaled
    // fluctuation mean must cancel identically.
    double mean_err = 0.0;
    {
      std::vector<double> inner;
      for (double t : grid) {
        if (t > 0.0 && t <= 1.0) inner.push_back(t);
      }
      if (!inner.empty()) {
        const Vector y_probe = Vector::Ones(spec.d());
        const BridgeLaw law =
            bridge_law(spec, eps, x_probe, y_probe, inner);
        const Matrix phi =
            phi_path(spec, eps, x_probe, y_probe, inner);
        mean_err = (law.mean_path - phi).cwiseAbs().maxCoeff();
      }
    }
    rep.sup_mean_error.push_back(mean_err);
  }

  // Least-squares slope of log(err) against log(eps).
  {
    const size_t n = eps_list.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
      const double lx = std::log(eps_list[i]);
      const double ly = std::log(std::max(rep.sup_cov_error[i], 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  rep.correction_times = {0.25, 0.5, 0.75};
  for (double t : rep.correction_times) {
    rep.corrections.push_back(alpha_expansion(spec, filt, t));
  }
  return rep;
}

}  // namespace hypobridge
