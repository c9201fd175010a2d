#pragma once

#include <cmath>
#include <numbers>

namespace gbarq {

// exp(-x) I_nu(x) for integer nu >= 0 and x >= 0.
inline double scaled_bessel_i(int nu, double x) {
  if (x < 0) x = -x;
  if (x < 600.0) return std::cyl_bessel_i(static_cast<double>(nu), x) * std::exp(-x);
  // Hankel expansion; at x >= 600 six terms are below double resolution
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace gbarq
