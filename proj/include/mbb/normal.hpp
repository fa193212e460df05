#pragma once

#include <cmath>
#include <limits>

#include "mbb/common.hpp"

namespace mbb {

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779; // 1/sqrt(2*pi)
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  static const double inv_sqrt2 = 0.7071067811865475244;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

// Inverse standard normal CDF. Rational initial guess (Acklam) polished with
// two Newton steps against erfc, giving ~1ulp over (1e-300, 1-1e-16).
inline double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::Precondition,
          "normal_quantile: p must lie in (0,1)");

  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u); // Halley step
  }
  return x;
}

// Mean of Z restricted to the quantile cell (Phi^{-1}(plo), Phi^{-1}(phi)),
// i.e. E[Z * 1_cell] / (phi - plo) = (pdf(qlo) - pdf(qhi)) / (phi - plo).
inline double gaussian_cell_mean(double plo, double phi) {
  require(0.0 <= plo && plo < phi && phi <= 1.0, ErrorKind::Precondition,
          "gaussian_cell_mean: need 0 <= plo < phi <= 1");
  double lo_pdf = (plo == 0.0) ? 0.0 : normal_pdf(normal_quantile(plo));
  double hi_pdf = (phi == 1.0) ? 0.0 : normal_pdf(normal_quantile(phi));
  return (lo_pdf - hi_pdf) / (phi - plo);
}

} // namespace mbb
