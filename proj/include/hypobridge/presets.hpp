#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hypobridge/model.hpp"

namespace hypobridge {

/// Closed-form reference evaluators attached to a preset. A field is left
/// empty (null function / 0x0 matrix) when no closed form is attached for
/// that preset. These are test fixtures: every attached evaluator must agree
/// with the corresponding computed quantity.
struct PresetReference {
  std::function<Matrix(double eps, double r)> exp_rA;      // e^{eps r A}
  std::function<Matrix(double eps, double t)> gamma;       // Gamma_t
  std::function<Matrix(double eps, double t)> exp_gamma;   // e^{eps t A} Gamma_t
  std::function<Matrix(double eps, double t)> alpha;       // alpha_t
  std::function<Matrix(double t)> mean_map;                // J_t V J_t V^-1
  std::function<Matrix(double t)> alpha_correction;        // first-order term
  Matrix v;
  Matrix v_inv;
  std::vector<Matrix> u;
};

struct Preset {
  std::string name;
  ModelSpec spec;
  PresetReference ref;
};

/// Named example models: "kolmogorov", "ou_area", "sec43", and
/// "iterated_kolmogorov:D" for 2 <= D <= 8.
Preset preset(const std::string& name);

Preset iterated_kolmogorov(int d);

std::vector<std::string> preset_names();

}  // namespace hypobridge
