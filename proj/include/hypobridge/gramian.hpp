#pragma once

#include <vector>

#include "hypobridge/model.hpp"

namespace hypobridge {

/// Controllability Gramian of the eps-scaled drift at horizon t together
/// with the flow map e^{eps t A}.
struct GramianSet {
  double eps = 0.0;
  double t = 0.0;
  Matrix gamma;    // int_0^t e^{-eps s A} B B^T e^{-eps s A^T} ds
  Matrix exp_tA;   // e^{eps t A}
};

/// int_0^t e^{-sM} B B^T e^{-sM^T} ds in closed form via the augmented
/// block-matrix exponential (Van Loan construction).
Matrix gramian_integral(const Matrix& M, const Matrix& B, double t);

GramianSet gramian(const ModelSpec& spec, double eps, double t);

/// eps * D^-1 * basis^T A basis * D, with the structurally vanishing blocks
/// (two or more levels below the diagonal) forced to exact zero. Subdiagonal
/// blocks are eps-independent; at eps = 0 this is the principal part.
Matrix scaled_drift(const ModelSpec& spec, const Filtration& filt,
                    double eps);

/// D^-1 basis^T alpha_t basis D: the conditioning map conjugated by the
/// anisotropic scaling. Stays O(1) and well-conditioned uniformly in eps,
/// which is why alpha itself is evaluated through it.
Matrix rescaled_alpha(const ModelSpec& spec, const Filtration& filt,
                      double eps, double t);

/// alpha_t = e^{eps t A} Gamma_t (Gamma_1)^-1 e^{-eps A}; maps the endpoint
/// mismatch into the bridge mean. alpha_0 = 0 and alpha_1 = I exactly.
Matrix alpha(const ModelSpec& spec, const Filtration& filt, double eps,
             double t);
Matrix alpha(const ModelSpec& spec, double eps, double t);

/// Mean path of the conditioned process: phi_t = e^{eps t A} x +
/// alpha_t (y - e^{eps A} x), evaluated at each grid time (one row per
/// time, d columns).
Matrix phi_path(const ModelSpec& spec, double eps, const Vector& x,
                const Vector& y, const std::vector<double>& grid);

/// Integrates the boundary-value Hamiltonian system q' = eps A q + B B^T p,
/// p' = -eps A^T p with the minimum-energy initial covector, and returns the
/// maximum deviation between the integrated position q and phi over a
/// uniform grid with `steps` classical Runge-Kutta steps.
double hamiltonian_verify(const ModelSpec& spec, double eps, const Vector& x,
                          const Vector& y, int steps);

}  // namespace hypobridge
