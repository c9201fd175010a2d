#pragma once
// Airy function Ai and its derivative on the real line, the negative zeros
// of Ai, and the gravitational quantum state eigenfunctions built on them.
//
// Evaluation strategy:
//   x >= 2       Ai(x) = sqrt(x/3) K_{1/3}(xi) / pi with xi = 2/3 x^{3/2}, the
//                Bessel function taken from its cosh integral representation
//                (trapezoid rule, exponentially convergent);
//   -1024 <= x < 2
//                Taylor expansion of the Airy equation y'' = x y about the
//                nearest node of a table with spacing 1/4; the table is filled
//                once by stepping the same expansion from the Maclaurin data at
//                x = 0 towards negative x, where both Airy solutions oscillate
//                and the stepping is stable;
//   x < -1024    modulus/phase asymptotic expansion.

#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gbarq/errors.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/quadrature.hpp"

namespace gbarq {

struct AiryValue {
  double ai = 0;
  double aip = 0;
};

namespace airy_detail {

inline constexpr double kAi0 = 0.355028053887817239260;   // 3^(-2/3) / Gamma(2/3)
inline constexpr double kAip0 = -0.258819403792806798405;  // -3^(-1/3) / Gamma(1/3)
inline constexpr double kTableStep = 0.25;
inline constexpr double kTableMin = -1024.0;
inline constexpr double kIntegralSeam = 2.0;

// y(c + d), y'(c + d) from y(c), y'(c), using the recurrence of y'' = x y.
inline AiryValue taylor_step(double c, AiryValue at_c, double d) {
  if (d == 0.0) return at_c;
  double a_km1 = 0.0;       // a_{k-1}
  double a_k = at_c.ai;     // a_k
  double a_kp1 = at_c.aip;  // a_{k+1}
  double y = a_k + a_kp1 * d;
  double yp = a_kp1;
  double dk = d;  // d^k for k = 1 at the start of the loop below
  int quiet = 0;
  for (int k = 0; k < 400; ++k) {
    // a_{k+2} = (c a_k + a_{k-1}) / ((k + 1)(k + 2))
    const double a_kp2 = (c * a_k + a_km1) / ((k + 1.0) * (k + 2.0));
    const double dkp1 = dk * d;              // d^(k+2)
    const double ty = a_kp2 * dkp1;          // term of y
    const double typ = (k + 2.0) * a_kp2 * dk;  // term of y'
    y += ty;
    yp += typ;
    const double scale = std::abs(y) + std::abs(yp) * std::abs(d) + 1e-300;
    if (std::abs(ty) + std::abs(typ * d) <= 1e-18 * scale) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    a_km1 = a_k;
    a_k = a_kp1;
    a_kp1 = a_kp2;
    dk = dkp1;
  }
  return {y, yp};
}

struct StepTable {
  std::vector<AiryValue> values;  // values[j] at x = -j * kTableStep

  StepTable() {
    const auto count = static_cast<std::size_t>(-kTableMin / kTableStep) + 1;
    values.resize(count);
    values[0] = {kAi0, kAip0};
    for (std::size_t j = 1; j < count; ++j) {
      const double c = -static_cast<double>(j - 1) * kTableStep;
      values[j] = taylor_step(c, values[j - 1], -kTableStep);
    }
  }
};

inline const StepTable& step_table() {
  static const StepTable table;
  return table;
}

// K_nu(xi) * exp(xi) = int_0^inf exp(-xi (cosh t - 1)) cosh(nu t) dt
inline double scaled_bessel_k(double nu, double xi) {
  const double h = std::min(0.3, 0.6 / std::sqrt(xi));
  double sum = 0.5;
  for (int k = 1; k < 10000; ++k) {
    const double t = k * h;
    const double e = xi * (std::cosh(t) - 1.0);
    if (e > 60.0) break;
    sum += std::exp(-e) * std::cosh(nu * t);
  }
  return h * sum;
}

inline AiryValue positive_integral(double x) {
  const double sx = std::sqrt(x);
  const double xi = 2.0 / 3.0 * x * sx;
  if (xi > 740.0) return {0.0, -0.0};
  const double decay = std::exp(-xi);
  const double k13 = scaled_bessel_k(1.0 / 3.0, xi);
  const double k23 = scaled_bessel_k(2.0 / 3.0, xi);
  const double ai = sx / std::sqrt(3.0) * k13 * decay / std::numbers::pi;
  const double aip = -x / (std::numbers::pi * std::sqrt(3.0)) * k23 * decay;
  return {ai, aip};
}

inline AiryValue negative_asymptotic(double x) {
  // x < 0; z = -x > 0
  const double z = -x;
  const double xi = 2.0 / 3.0 * z * std::sqrt(z);
  std::array<double, 8> u{};
  u[0] = 1.0;
  for (int k = 1; k < 8; ++k) {
    u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
  }
  double p = 0, q = 0, r = 0, s = 0;
  double xik = 1.0;
  for (int k = 0; k < 8; ++k) {
    const double vk = (k == 0) ? 1.0 : -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u[k];
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * u[k] / xik;
      r += sign * vk / xik;
    } else {
      q += sign * u[k] / xik;
      s += sign * vk / xik;
    }
    xik *= xi;
  }
  const double phase = xi - std::numbers::pi / 4.0;
  const double c = std::cos(phase), sn = std::sin(phase);
  const double z4 = std::pow(z, 0.25);
  const double isp = 1.0 / std::sqrt(std::numbers::pi);
  return {isp / z4 * (c * p + sn * q), isp * z4 * (sn * r - c * s)};
}

}  // namespace airy_detail

inline AiryValue airy(double x) {
  using namespace airy_detail;
  if (std::isnan(x)) throw DomainError("airy: NaN argument");
  if (x >= kIntegralSeam) {
    if (std::isinf(x)) return {0.0, -0.0};
    return positive_integral(x);
  }
  if (x < kTableMin) {
    if (std::isinf(x)) throw DomainError("airy: argument -inf");
    return negative_asymptotic(x);
  }
  if (x >= 0.0) return taylor_step(0.0, {kAi0, kAip0}, x);
  const auto& tab = step_table().values;
  const auto j = static_cast<std::size_t>(std::lround(-x / kTableStep));
  const double c = -static_cast<double>(j) * kTableStep;
  return taylor_step(c, tab[j], x - c);
}

inline double airy_ai(double x) { return airy(x).ai; }
inline double airy_ai_prime(double x) { return airy(x).aip; }

// ---------------------------------------------------------------------------
// Zeros

struct AiryZeroTable {
  std::vector<double> lambdas;    // lambda_n = -a_n, n = 1..n_max (index n-1)
  std::vector<double> aiprimes;   // Ai'(-lambda_n)

  std::size_t size() const noexcept { return lambdas.size(); }
  double lambda(int n) const { return lambdas.at(static_cast<std::size_t>(n - 1)); }
  double aiprime(int n) const { return aiprimes.at(static_cast<std::size_t>(n - 1)); }
};

struct GQSMode {
  int n = 0;
  double lambda_n = 0;
  double aiprime_at_zero = 0;
};

// Asymptotic location of the n-th zero, lambda_n ~ T(3 pi (4n - 1) / 8).
inline double airy_zero_asymptotic(int n) {
  const double t = 3.0 * std::numbers::pi * (4.0 * n - 1.0) / 8.0;
  const double t2 = 1.0 / (t * t);
  return std::pow(t, 2.0 / 3.0) *
         (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77125.0 / 82944.0 - t2 * 108056875.0 / 6967296.0))));
}

inline double refine_airy_zero(double guess) {
  // bracket of half the local spacing pi / sqrt(lambda) on either side
  const double half = 0.45 * std::numbers::pi / std::sqrt(std::max(guess, 1.0));
  double lo = guess - half, hi = guess + half;
  double flo = airy_ai(-lo), fhi = airy_ai(-hi);
  if (flo * fhi > 0) throw NumericError("airy_zeros: asymptotic guess does not bracket a zero");
  double lam = guess;
  for (int it = 0; it < 200; ++it) {
    const AiryValue v = airy(-lam);
    if (v.ai == 0.0) return lam;
    if ((v.ai > 0) == (flo > 0)) {
      lo = lam;
      flo = v.ai;
    } else {
      hi = lam;
    }
    double next = lam + v.ai / v.aip;  // Newton on f(l) = Ai(-l), f' = -Ai'(-l)
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - lam;
    lam = next;
    if (std::abs(step) <= 4e-16 * lam || hi - lo <= 4e-16 * lam) break;
  }
  return lam;
}

inline AiryZeroTable airy_zeros(int n_max) {
  if (n_max < 1 || n_max > 5000) throw DomainError("airy_zeros: n_max must be in [1, 5000]");
  AiryZeroTable t;
  t.lambdas.resize(n_max);
  t.aiprimes.resize(n_max);
  for (int n = 1; n <= n_max; ++n) {
    // the asymptotic form is poor for n = 1, 2; seed those with known values
    double guess = airy_zero_asymptotic(n);
    if (n == 1) guess = 2.338;
    if (n == 2) guess = 4.088;
    const double lam = refine_airy_zero(guess);
    t.lambdas[n - 1] = lam;
    t.aiprimes[n - 1] = airy_ai_prime(-lam);
  }
  for (int n = 1; n < n_max; ++n) {
    if (!(t.lambdas[n] > t.lambdas[n - 1])) throw NumericError("airy_zeros: table not increasing");
  }
  return t;
}

inline GQSMode mode(const AiryZeroTable& t, int n) {
  if (n < 1 || n > static_cast<int>(t.size())) {
    throw DomainError("mode index " + std::to_string(n) + " outside [1, " + std::to_string(t.size()) + "]");
  }
  return {n, t.lambdas[n - 1], t.aiprimes[n - 1]};
}

// Zero-table cache: plain text, one lambda per line, 17 significant digits
// (exact round trip).
inline void write_zero_table(const AiryZeroTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write zero table " + path);
  out << std::setprecision(17);
  for (double l : t.lambdas) out << l << '\n';
}

inline AiryZeroTable read_zero_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read zero table " + path);
  AiryZeroTable t;
  double l = 0;
  while (in >> l) {
    if (!t.lambdas.empty() && !(l > t.lambdas.back())) throw NumericError("zero table not increasing: " + path);
    t.lambdas.push_back(l);
  }
  if (t.lambdas.empty()) throw NumericError("empty zero table: " + path);
  t.aiprimes.reserve(t.lambdas.size());
  for (double lam : t.lambdas) t.aiprimes.push_back(airy_ai_prime(-lam));
  return t;
}

// ---------------------------------------------------------------------------
// GQS eigenfunctions

// Distance above the turning point beyond which Ai has decayed below 1e-12.
inline constexpr double kModeSupportMargin = 15.0;

// phi_n(x) = Ai(x - lambda_n) / Ai'(-lambda_n) for x >= 0, zero below; unit
// normalized in units of l_g.
inline double eigenfunction_dimless(const GQSMode& m, double x) {
  if (x < 0) return 0.0;
  return airy_ai(x - m.lambda_n) / m.aiprime_at_zero;
}

// chi_n(z) in m^(-1/2)
inline double eigenfunction(const AiryZeroTable& t, int n, double z, const ScaleSet& s) {
  const GQSMode md = mode(t, n);
  return eigenfunction_dimless(md, z / s.l_g) / std::sqrt(s.l_g);
}

// Half-line Fourier transform (2 pi)^(-1/2) int_0^inf phi_n(x) exp(-i P x) dx
// in dimensionless units. Composite Gauss-Legendre with an average node
// spacing of at most 1/8 of min(local Airy wavelength, 1/|P|).
inline std::complex<double> eigenfunction_momentum_dimless(const GQSMode& m, double P) {
  const double upper = m.lambda_n + kModeSupportMargin;
  const double k_airy = std::sqrt(std::max(m.lambda_n, 1.0));
  const double wavelength = 2.0 * std::numbers::pi / k_airy;
  const double scale = std::min(wavelength, std::abs(P) > 0 ? 1.0 / std::abs(P) : wavelength);
  constexpr int kOrder = 16;
  const double spacing = scale / 8.0;
  const QuadratureRule rule = panel_gauss_legendre(0.0, upper, spacing * kOrder, kOrder);
  std::complex<double> acc{};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    acc += rule.weights[i] * eigenfunction_dimless(m, x) * std::polar(1.0, -P * x);
  }
  return acc / std::sqrt(2.0 * std::numbers::pi);
}

// chi~_n(p_z) in (kg m/s)^(-1/2)
inline std::complex<double> eigenfunction_momentum(const AiryZeroTable& t, int n, double p_z, const ScaleSet& s) {
  const GQSMode md = mode(t, n);
  return eigenfunction_momentum_dimless(md, p_z / s.p_g()) / std::sqrt(s.p_g());
}

}  // namespace gbarq
