#include "hypobridge/bridge.hpp"

#include <cmath>

#include "hypobridge/rng.hpp"

namespace hypobridge {

Matrix process_cov(const ModelSpec& spec, double eps, double t1, double t2) {
  if (t1 > t2) {
    throw BadTimeOrderError("process_cov: requires t1 <= t2");
  }
  if (t1 < 0.0 || t2 > 1.0) {
    throw std::invalid_argument("process_cov: times must lie in [0, 1]");
  }
  if (eps <= 0.0) throw std::invalid_argument("process_cov: eps must be > 0");
  const Matrix gamma = gramian_integral(eps * spec.A, spec.B, t1);
  return eps * expm(eps * t1 * spec.A) * gamma *
         expm(eps * t2 * spec.A).transpose();
}

Vector ProcessLaw::mean(double t) const { return expm(eps * t * spec.A) * x; }

Matrix ProcessLaw::cov(double t1, double t2) const {
  if (t1 <= t2) return process_cov(spec, eps, t1, t2);
  return process_cov(spec, eps, t2, t1).transpose();
}

ProcessLaw process_law(const ModelSpec& spec, double eps, const Vector& x) {
  if (eps <= 0.0) throw std::invalid_argument("process_law: eps must be > 0");
  if (x.size() != spec.d()) {
    throw ShapeMismatchError("process_law: x must have dimension d");
  }
  return ProcessLaw{spec, eps, x};
}

Matrix BridgeLaw::cov_block(size_t i, size_t j) const {
  const Index d = dim();
  return joint_cov.block(static_cast<Index>(i) * d,
                         static_cast<Index>(j) * d, d, d);
}

BridgeLaw bridge_law(const ModelSpec& spec, double eps, const Vector& x,
                     const Vector& y, const std::vector<double>& grid) {
  if (eps <= 0.0) throw std::invalid_argument("bridge_law: eps must be > 0");
  const Index d = spec.d();
  if (x.size() != d || y.size() != d) {
    throw ShapeMismatchError("bridge_law: x and y must have dimension d");
  }
  if (grid.empty()) throw BadGridError("bridge_law: grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0 || grid[i] > 1.0) {
      throw BadGridError("bridge_law: grid times must lie in (0, 1]");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw BadGridError("bridge_law: grid must be strictly increasing");
    }
  }

  const size_t n = grid.size();
  const Filtration filt = filtration(spec);
  const ProcessLaw xlaw = process_law(spec, eps, x);

  BridgeLaw law;
  law.spec = spec;
  law.eps = eps;
  law.x = x;
  law.y = y;
  law.grid = grid;

  // Per-time ingredients of z_t = x_t - alpha_t (x_1 - y).
  std::vector<Matrix> alphas(n), cov_t1(n);
  const Matrix cov_11 = xlaw.cov(1.0, 1.0);
  const Vector exp1x = expm(eps * spec.A) * x;
  law.mean_path.resize(static_cast<Index>(n), d);
  for (size_t i = 0; i < n; ++i) {
    alphas[i] = alpha(spec, filt, eps, grid[i]);
    cov_t1[i] = xlaw.cov(grid[i], 1.0);
    law.mean_path.row(i) =
        (xlaw.mean(grid[i]) + alphas[i] * (y - exp1x)).transpose();
  }

  law.joint_cov.resize(static_cast<Index>(n) * d, static_cast<Index>(n) * d);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      Matrix block = xlaw.cov(grid[i], grid[j]) -
                     cov_t1[i] * alphas[j].transpose() -
                     alphas[i] * cov_t1[j].transpose() +
                     alphas[i] * cov_11 * alphas[j].transpose();
      law.joint_cov.block(static_cast<Index>(i) * d,
                          static_cast<Index>(j) * d, d, d) = block;
      if (j > i) {
        law.joint_cov.block(static_cast<Index>(j) * d,
                            static_cast<Index>(i) * d, d, d) =
            block.transpose();
      }
    }
  }
  // Symmetrize the diagonal blocks against rounding.
  law.joint_cov = 0.5 * (law.joint_cov + law.joint_cov.transpose()).eval();
  return law;
}

std::vector<Matrix> sample_bridge(const BridgeLaw& law, int n_paths,
                                  std::uint64_t seed, double jitter) {
  if (n_paths < 1) {
    throw std::invalid_argument("sample_bridge: n_paths must be >= 1");
  }
  const Index d = law.dim();
  const Index nd = law.joint_cov.rows();
  const Matrix l = chol_psd(law.joint_cov, jitter);

  std::vector<Matrix> paths(static_cast<size_t>(n_paths));
  for (int k = 0; k < n_paths; ++k) {
    GaussianStream stream(seed, static_cast<std::uint64_t>(k));
    const Vector z = l * stream.next_vector(nd);
    Matrix path(static_cast<Index>(law.grid.size()), d);
    for (size_t i = 0; i < law.grid.size(); ++i) {
      path.row(i) = law.mean_path.row(static_cast<Index>(i)) +
                    z.segment(static_cast<Index>(i) * d, d).transpose();
    }
    paths[static_cast<size_t>(k)] = std::move(path);
  }
  return paths;
}

std::vector<Matrix> sample_unconditioned(const ModelSpec& spec, double eps,
                                         const Vector& x,
                                         const std::vector<double>& grid,
                                         int n_paths, std::uint64_t seed) {
  if (n_paths < 1) {
    throw std::invalid_argument(
        "sample_unconditioned: n_paths must be >= 1");
  }
  if (grid.empty()) throw BadGridError("sample_unconditioned: grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0 ||
        (i > 0 && grid[i] <= grid[i - 1])) {
      throw BadGridError(
          "sample_unconditioned: grid must be strictly increasing in [0, 1]");
    }
  }
  const Index d = spec.d();
  if (x.size() != d) {
    throw ShapeMismatchError("sample_unconditioned: x must have dimension d");
  }

  // Exact one-step transition: state -> e^{eps dt A} state + noise, noise
  // covariance eps e^{eps dt A} Gamma_dt e^{eps dt A^T}.
  const size_t n = grid.size();
  std::vector<Matrix> flow(n), noise_chol(n);
  double prev = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dt = grid[i] - prev;
    const Matrix ed = expm(eps * dt * spec.A);
    flow[i] = ed;
    const Matrix cov =
        eps * ed * gramian_integral(eps * spec.A, spec.B, dt) *
        ed.transpose();
    noise_chol[i] = chol_psd(cov);
    prev = grid[i];
  }

  std::vector<Matrix> paths(static_cast<size_t>(n_paths));
  for (int k = 0; k < n_paths; ++k) {
    GaussianStream stream(seed, static_cast<std::uint64_t>(k));
    Matrix path(static_cast<Index>(n), d);
    Vector state = x;
    for (size_t i = 0; i < n; ++i) {
      state = flow[i] * state + noise_chol[i] * stream.next_vector(d);
      path.row(static_cast<Index>(i)) = state.transpose();
    }
    paths[static_cast<size_t>(k)] = std::move(path);
  }
  return paths;
}

}  // namespace hypobridge
