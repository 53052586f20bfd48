#include "hypobridge/presets.hpp"

#include <cmath>

#include "hypobridge/fluct.hpp"

namespace hypobridge {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Matrix mat2(double a11, double a12, double a21, double a22) {
  Matrix m(2, 2);
  m << a11, a12, a21, a22;
  return m;
}

// Shared by all three planar presets: they have identical u-blocks and so
// identical limit fluctuations.
void attach_planar_limit(PresetReference& ref) {
  ref.v = mat2(1.0, -0.5, 0.5, -1.0 / 6.0);
  ref.v_inv = mat2(-2.0, 6.0, -6.0, 12.0);
  ref.u = {Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  ref.mean_map = [](double t) {
    return mat2(3 * t * t - 2 * t, 6 * t - 6 * t * t, t * t * t - t * t,
                3 * t * t - 2 * t * t * t);
  };
}

Vector B_e1(int d) {
  Vector b = Vector::Zero(d);
  b(0) = 1.0;
  return b;
}

}  // namespace

Preset preset(const std::string& name) {
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  if (base == "iterated_kolmogorov") {
    if (colon == std::string::npos) {
      throw UnknownPresetError(
          "preset: iterated_kolmogorov needs a dimension, e.g. "
          "iterated_kolmogorov:3");
    }
    int d = 0;
    try {
      d = std::stoi(name.substr(colon + 1));
    } catch (const std::exception&) {
      throw UnknownPresetError("preset: bad dimension in '" + name + "'");
    }
    return iterated_kolmogorov(d);
  }
  if (colon != std::string::npos) {
    throw UnknownPresetError("preset: unknown preset '" + name + "'");
  }

  if (base == "kolmogorov") {
    Preset p;
    p.name = base;
    p.spec = build_model(mat2(0, 0, 1, 0), B_e1(2));
    attach_planar_limit(p.ref);
    p.ref.exp_rA = [](double eps, double r) {
      return mat2(1.0, 0.0, eps * r, 1.0);
    };
    p.ref.gamma = [](double eps, double t) {
      return mat2(t, -0.5 * eps * t * t, -0.5 * eps * t * t,
                  eps * eps * t * t * t / 3.0);
    };
    p.ref.exp_gamma = [](double eps, double t) {
      return mat2(t, -0.5 * eps * t * t, 0.5 * eps * t * t,
                  -eps * eps * t * t * t / 6.0);
    };
    p.ref.alpha = [](double eps, double t) {
      return mat2(3 * t * t - 2 * t, (6 * t - 6 * t * t) / eps,
                  (t * t * t - t * t) * eps, 3 * t * t - 2 * t * t * t);
    };
    // The printed alpha is exact for every eps: no first-order correction.
    p.ref.alpha_correction = [](double) { return Matrix::Zero(2, 2); };
    return p;
  }

  if (base == "ou_area") {
    Preset p;
    p.name = base;
    p.spec = build_model(mat2(-1, 0, 1, 0), B_e1(2));
    attach_planar_limit(p.ref);
    p.ref.exp_rA = [](double eps, double r) {
      const double e = std::exp(-eps * r);
      return mat2(e, 0.0, 1.0 - e, 1.0);
    };
    p.ref.gamma = [](double eps, double t) {
      const double et = std::exp(eps * t);
      const double e2t = std::exp(2.0 * eps * t);
      return mat2((e2t - 1.0) / (2.0 * eps),
                  -(et - 1.0) * (et - 1.0) / (2.0 * eps),
                  -(et - 1.0) * (et - 1.0) / (2.0 * eps),
                  (e2t - 4.0 * et + 2.0 * eps * t + 3.0) / (2.0 * eps));
    };
    p.ref.exp_gamma = [](double eps, double t) {
      const double ep = std::exp(eps * t);
      const double em = std::exp(-eps * t);
      return mat2((ep - em) / (2.0 * eps), -(ep + em - 2.0) / (2.0 * eps),
                  (ep + em - 2.0) / (2.0 * eps),
                  -(ep - em - 2.0 * eps * t) / (2.0 * eps));
    };
    // The denominators shrink like eps^3, so the printed form is evaluated
    // in extended precision to keep the fixture itself from cancelling.
    p.ref.alpha = [](double eps_in, double t_in) {
      const long double eps = eps_in, t = t_in;
      const long double e = std::exp(eps);
      const long double denom1 = (e - 1.0L) * ((eps - 2.0L) * e + eps + 2.0L);
      const long double denom2 = (eps + 2.0L) * std::exp(-eps) + eps - 2.0L;
      const long double a11 = (1.0L - std::exp(-eps * t)) *
                              ((eps - 1.0L) * std::exp(eps * (1.0L + t)) +
                               std::exp(eps * t) + (eps + 1.0L) * e -
                               std::exp(2.0L * eps)) /
                              denom1;
      const long double a12 = (std::exp(-eps) - std::exp(-eps * (1.0L - t)) -
                               std::exp(-eps * t) + 1.0L) /
                              denom2;
      const long double a21 =
          (std::exp(2.0L * eps) - 1.0L +
           (eps + 1.0L) * std::exp(eps * (1.0L - t)) + std::exp(eps * t) +
           (eps - 1.0L) * std::exp(eps * (1.0L + t)) -
           eps * t * (e - 1.0L) * (e - 1.0L) - 2.0L * eps * e -
           std::exp(eps * (2.0L - t))) /
          denom1;
      const long double a22 =
          (std::exp(-eps * t) - std::exp(-eps * (1.0L - t)) +
           (eps * t + 1.0L) * std::exp(-eps) + eps * t - 1.0L) /
          denom2;
      return mat2(static_cast<double>(a11), static_cast<double>(a12),
                  static_cast<double>(a21), static_cast<double>(a22));
    };
    // All first-order terms of the conditioning map vanish here.
    p.ref.alpha_correction = [](double) { return Matrix::Zero(2, 2); };
    return p;
  }

  if (base == "sec43") {
    Preset p;
    p.name = base;
    p.spec = build_model(mat2(-1, 0, 1, 2), B_e1(2));
    attach_planar_limit(p.ref);
    p.ref.exp_rA = [](double eps, double r) {
      const double em = std::exp(-eps * r);
      const double e2 = std::exp(2.0 * eps * r);
      return mat2(em, 0.0, (e2 - em) / 3.0, e2);
    };
    p.ref.exp_gamma = [](double eps, double t) {
      const double ep = std::exp(eps * t);
      const double em = std::exp(-eps * t);
      const double ep2 = std::exp(2.0 * eps * t);
      const double em2 = std::exp(-2.0 * eps * t);
      return mat2((ep - em) / (2.0 * eps),
                  -(2.0 * em2 - 3.0 * em + ep) / (6.0 * eps),
                  (2.0 * ep2 - 3.0 * ep + em) / (6.0 * eps),
                  -(ep2 - 2.0 * ep + 2.0 * em - em2) / (12.0 * eps));
    };
    p.ref.alpha_correction = [](double t) {
      return mat2(2 * t * t - 2 * t * t * t, 4 * t * t * t - 4 * t, 0.0,
                  2 * t * t * t - 2 * t * t);
    };
    return p;
  }

  throw UnknownPresetError("preset: unknown preset '" + name + "'");
}

Preset iterated_kolmogorov(int d) {
  if (d < 2 || d > 8) {
    throw UnsupportedDimensionError(
        "iterated_kolmogorov: dimension must be in [2, 8]");
  }
  Matrix a = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) a(i, i - 1) = 1.0;

  Preset p;
  p.name = "iterated_kolmogorov:" + std::to_string(d);
  p.spec = build_model(a, B_e1(d));

  double fact = 1.0;
  for (int i = 1; i <= d; ++i) {
    if (i >= 2) fact *= (i - 1);
    p.ref.u.push_back(Matrix::Constant(1, 1, 1.0 / fact));
  }

  Matrix v(d, d);
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      double f = 1.0;
      for (int q = 2; q <= i + j - 1; ++q) f *= q;
      v(i - 1, j - 1) = ((j % 2 == 1) ? 1.0 : -1.0) / f;
    }
  }
  p.ref.v = v;
  p.ref.v_inv = hankel_v_inverse(d);

  p.ref.exp_rA = [d](double eps, double r) {
    Matrix e = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      double term = 1.0;
      for (int i = j; i < d; ++i) {
        e(i, j) = term;
        term *= eps * r / (i - j + 1);
      }
    }
    return e;
  };

  p.ref.mean_map = [d](double t) {
    Matrix m(d, d);
    for (int i = 1; i <= d; ++i) {
      for (int j = 1; j <= d; ++j) {
        double sum = 0.0;
        for (int l = 1; l <= d; ++l) {
          double inner = 0.0;
          for (int k = 0; k <= l - 1; ++k) {
            inner += binom(d - l + k, j - 1) * binom(d + k - 1, k);
          }
          double fact_ratio = 1.0;  // (l-1)! j! / (i+l-1)!
          {
            double num = 1.0, den = 1.0;
            for (int q = 2; q <= l - 1; ++q) num *= q;
            for (int q = 2; q <= j; ++q) num *= q;
            for (int q = 2; q <= i + l - 1; ++q) den *= q;
            fact_ratio = num / den;
          }
          const double sign = ((d + j + l + 1) % 2 == 0) ? 1.0 : -1.0;
          sum += sign * fact_ratio * binom(d - 1, l - 1) *
                 binom(d + j - 1, j) * inner * std::pow(t, i + l - 1);
        }
        m(i - 1, j - 1) = sum;
      }
    }
    return m;
  };
  return p;
}

std::vector<std::string> preset_names() {
  return {"kolmogorov", "ou_area", "sec43", "iterated_kolmogorov:<d>"};
}

}  // namespace hypobridge
