#pragma once

#include <cstdint>
#include <vector>

#include "hypobridge/gramian.hpp"

namespace hypobridge {

/// cov(x_{t1}, x_{t2}) = eps e^{eps t1 A} Gamma_{t1} e^{eps t2 A^T} for
/// t1 <= t2 (throws BadTimeOrderError otherwise).
Matrix process_cov(const ModelSpec& spec, double eps, double t1, double t2);

/// Gaussian law of the unconditioned process started at x.
struct ProcessLaw {
  ModelSpec spec;
  double eps = 0.0;
  Vector x;

  Vector mean(double t) const;
  Matrix cov(double t1, double t2) const;  // any argument order
};

ProcessLaw process_law(const ModelSpec& spec, double eps, const Vector& x);

/// Finite-grid Gaussian law of the process conditioned on ending at y:
/// mean path plus the joint covariance over all grid times, stored as an
/// (N*d) x (N*d) matrix of d x d blocks in grid order.
struct BridgeLaw {
  ModelSpec spec;
  double eps = 0.0;
  Vector x, y;
  std::vector<double> grid;
  Matrix mean_path;  // N x d, row i = mean at grid[i]
  Matrix joint_cov;  // (N d) x (N d)

  Index dim() const { return spec.d(); }
  Matrix cov_block(size_t i, size_t j) const;
};

BridgeLaw bridge_law(const ModelSpec& spec, double eps, const Vector& x,
                     const Vector& y, const std::vector<double>& grid);

/// Exact Gaussian draws from a bridge law; one N x d matrix per path.
std::vector<Matrix> sample_bridge(const BridgeLaw& law, int n_paths,
                                  std::uint64_t seed, double jitter = 0.0);

/// Distributionally exact sampling of the unconditioned process at the grid
/// times, by exact Gaussian increments between consecutive grid points.
std::vector<Matrix> sample_unconditioned(const ModelSpec& spec, double eps,
                                         const Vector& x,
                                         const std::vector<double>& grid,
                                         int n_paths, std::uint64_t seed);

}  // namespace hypobridge
