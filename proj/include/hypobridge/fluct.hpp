#pragma once

#include <cstdint>
#include <vector>

#include "hypobridge/bridge.hpp"

namespace hypobridge {

/// Anisotropic rescaling pair attached to a filtration: D_eps carries
/// eps^{k-1} and J_t carries t^{k-1/2} on the level-k coordinates.
struct Scaling {
  Filtration filt;
  Vector d_eps(double eps) const { return d_scaling(filt, eps); }
  Vector j_t(double t) const { return j_scaling(filt, t); }
};

Scaling scaling(const Filtration& filt);

/// Stacked polynomial blocks r^{k-1} u_k (the eps -> 0 limit shape of
/// D_eps^-1 e^{eps r A} B in the adapted basis).
Matrix u_hat(const UBlocks& u, double r);

/// V_{kl} = (-1)^{l+1} u_k u_l^T (k-1)!(l-1)!/(k+l-1)!.
Matrix v_matrix(const UBlocks& u);

/// int_0^1 u_hat(1-s) u_hat(-s)^T ds by Gauss-Legendre quadrature; the
/// integrand is polynomial, so this is exact for quad_order >= n and serves
/// as an independent route to v_matrix.
Matrix v_from_integral(const UBlocks& u, int quad_order = 40);

/// Inverse of V by an equilibrated full-pivot solve carried out in extended
/// precision. Throws IllConditionedError when even the equilibrated matrix
/// has 1-norm condition above 1e12. When cond_out is non-null it receives
/// the equilibrated condition estimate.
Matrix v_inverse(const Matrix& v, double* cond_out = nullptr);

/// Closed-form inverse of the alternating-sign factorial Hankel matrix
/// V_ij = (-1)^{j+1}/(i+j-1)! (the m = 1 full-ladder case). Exact in double
/// for d <= 8; larger d would overflow the exactly representable integer
/// range, so UnsupportedDimensionError is raised.
Matrix hankel_v_inverse(int d);

/// M(t) = J_t V J_t V^-1; M(0) = 0 and M(1) = I.
Matrix limit_mean_map(const Scaling& s, const Matrix& v, const Matrix& vinv,
                      double t);

/// Covariance kernel of the limit fluctuation loop F at (t1, t2), t1 <= t2,
/// assembled from the polynomial kernel K(a, b) =
/// int_0^min(a,b) u_hat(a-s) u_hat(b-s)^T ds in closed form.
Matrix limit_cov(const UBlocks& u, const Scaling& s, double t1, double t2);

/// eps^-1 D_eps^-1 cov(z_t1, z_t2) D_eps^-1 in the adapted basis: the
/// covariance of the rescaled bridge fluctuations, evaluated entirely in
/// scaled variables so it stays accurate uniformly as eps -> 0.
Matrix rescaled_cov(const ModelSpec& spec, const Filtration& filt,
                    double eps, double t1, double t2);
Matrix rescaled_cov(const ModelSpec& spec, double eps, double t1, double t2);

/// Leading and first-order coefficients of the rescaled conditioning map:
/// D^-1 alpha_t D = leading + eps * correction + O(eps^2), extracted by
/// Richardson extrapolation at eps0, eps0/2, eps0/4. Entry (i, j) of
/// `correction` is the coefficient of eps^{k_i - k_j + 1} of alpha_t itself.
struct AlphaExpansion {
  Matrix leading;
  Matrix correction;
};

AlphaExpansion alpha_expansion(const ModelSpec& spec, const Filtration& filt,
                               double t, double eps0 = 0.02);

/// The limit fluctuation process in one bundle: u-blocks, scaling, the
/// moment matrix pair, and the induced mean map and covariance kernel.
struct FluctuationLaw {
  UBlocks ublocks;
  Scaling scale;
  Matrix V;
  Matrix Vinv;
  double v_cond = 0.0;

  Matrix mean_map(double t) const;
  Matrix cov(double t1, double t2) const;
};

FluctuationLaw fluctuation_law(const ModelSpec& spec,
                               double rank_tol = 1e-10);

/// Exact Gaussian draws of the limit loop on a grid in (0, 1].
std::vector<Matrix> sample_limit(const FluctuationLaw& law,
                                 const std::vector<double>& grid,
                                 int n_paths, std::uint64_t seed,
                                 double jitter = 0.0);

struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<double> grid;
  std::vector<double> sup_cov_error;   // sup over grid pairs, per eps
  std::vector<double> sup_mean_error;  // sup over grid, per eps
  double slope = 0.0;                  // log-log fit of sup_cov_error
  std::vector<Matrix> pair_errors;     // per eps, |grid| x |grid|
  std::vector<double> correction_times;
  std::vector<AlphaExpansion> corrections;  // per correction time
};

/// Empirical check of the covariance convergence: for each eps the sup over
/// grid pairs of ||rescaled_cov - limit_cov|| (spectral norm), the fitted
/// log-log decay slope, and the Richardson-extracted expansion coefficients
/// of the conditioning map at a few interior times.
ConvergenceReport convergence_report(const ModelSpec& spec,
                                     const std::vector<double>& eps_list,
                                     const std::vector<double>& grid);

}  // namespace hypobridge
