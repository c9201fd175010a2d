#pragma once
// Reference computations shared by the unit tests and the acceptance run.
// Each returns a measured error or value; thresholds live with the callers.

#include <boost/math/special_functions/airy.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gbarq/freefall.hpp"
#include "gbarq/inference.hpp"
#include "gbarq/quadrature.hpp"

namespace oracle {

using cplx = std::complex<double>;

// n-th zero of Ai(-x) by plain bisection on Boost's Ai, bracketing by a
// scan with step 0.05 from the previous zero.
inline std::vector<double> bisection_zeros(int n_max) {
  auto f = [](double l) { return boost::math::airy_ai(-l); };
  std::vector<double> out;
  double a = 0.0, fa = f(a);
  while (static_cast<int>(out.size()) < n_max) {
    const double b = a + 0.05, fb = f(b);
    if (fa == 0.0 || fa * fb < 0) {
      double lo = a, hi = b, flo = fa;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return out;
}

// Gaussian exp(-(x - x0)^2 / (4 sig2) + i k0 x), normalized, evolved freely
// under i d/ds = -d^2/dx^2 and then mapped to gravity through the altitude
// shift: psi(X, s) = exp(-i s (X + s^2/3)) psi_free(X + s^2, s).
struct Gaussian {
  double x0, sig2, k0;

  cplx initial(double x) const {
    const double d = x - x0;
    return std::pow(2.0 * std::numbers::pi * sig2, -0.25) * std::exp(-d * d / (4.0 * sig2)) * std::polar(1.0, k0 * x);
  }
  cplx free(double x, double s) const {
    const cplx a(sig2, s);
    const double c = x - x0 - 2.0 * k0 * s;
    return std::pow(2.0 * std::numbers::pi * sig2, -0.25) * std::sqrt(sig2 / a) *
           std::exp(-c * c / (4.0 * a) + cplx(0.0, k0 * x - k0 * k0 * s));
  }
  cplx gravity(double X, double s) const { return std::polar(1.0, -s * (X + s * s / 3.0)) * free(X + s * s, s); }
  // -i d/dX of gravity(X, s)
  cplx gravity_grad(double X, double s) const {
    const double Xp = X + s * s;
    const cplx a(sig2, s);
    const double c = Xp - x0 - 2.0 * k0 * s;
    const cplx dlog = cplx(0.0, -s) - c / (2.0 * a) + cplx(0.0, k0);
    return cplx(0.0, -1.0) * dlog * gravity(X, s);
  }
};

// Relative L2 errors of psi and of the gradient between propagate_sampled and
// the closed form, over a window of +-6 widths around the packet.
struct GaussianErrors {
  double psi = 0, grad = 0;
};

inline GaussianErrors gaussian_propagation_errors(const Gaussian& g, double s) {
  const double sig = std::sqrt(g.sig2);
  const auto rule = gbarq::panel_gauss_legendre(g.x0 - 12.0 * sig, g.x0 + 12.0 * sig, 0.05 * sig, 16);
  std::vector<cplx> psi(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) psi[j] = g.initial(rule.nodes[j]);
  const double width = std::abs(cplx(g.sig2, s)) / sig;
  const double centre = g.x0 + 2.0 * g.k0 * s - s * s;
  double e1 = 0, n1 = 0, e2 = 0, n2 = 0;
  for (int i = 0; i <= 400; ++i) {
    const double X = centre - 6.0 * width + 12.0 * width * i / 400.0;
    const auto [p, q] = gbarq::propagate_sampled(rule.nodes, rule.weights, psi, s, X);
    const cplx pe = g.gravity(X, s), qe = g.gravity_grad(X, s);
    e1 += std::norm(p - pe);
    n1 += std::norm(pe);
    e2 += std::norm(q - qe);
    n2 += std::norm(qe);
  }
  return {std::sqrt(e1 / n1), std::sqrt(e2 / n2)};
}

// Samples phi = sum_n a_n phi_n on a fine rule over its support.
struct SampledState {
  gbarq::QuadratureRule rule;
  std::vector<cplx> psi;
};

inline SampledState sample_modes(const gbarq::AiryZeroTable& z, const std::vector<cplx>& a, double spacing = 0.01) {
  const int n = static_cast<int>(a.size());
  SampledState st;
  st.rule = gbarq::panel_gauss_legendre(0.0, z.lambda(n) + gbarq::kModeSupportMargin, spacing * 16, 16);
  st.psi.assign(st.rule.size(), {});
  for (int k = 1; k <= n; ++k) {
    const auto md = gbarq::mode(z, k);
    for (std::size_t j = 0; j < st.rule.size(); ++j) st.psi[j] += a[k - 1] * gbarq::eigenfunction_dimless(md, st.rule.nodes[j]);
  }
  return st;
}

// Integral over fall time of the current through the plane X for mode n
// released at s = 0; the exact answer is 1. The current in units of v_g / l_g
// integrates over s in units of t_g, and v_g t_g = 2 l_g.
inline double single_mode_flux(int n, double X, double s_lo, double s_hi, int steps) {
  const auto z = gbarq::airy_zeros(n);
  std::vector<cplx> a(n, 0.0);
  a[n - 1] = 1.0;
  const SampledState st = sample_modes(z, a);
  const auto tr = gbarq::panel_gauss_legendre(s_lo, s_hi, (s_hi - s_lo) / steps * 16, 16);
  double acc = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto [p, q] = gbarq::propagate_sampled(st.rule.nodes, st.rule.weights, st.psi, tr.nodes[i], X);
    acc += tr.weights[i] * -std::real(std::conj(p) * q);
  }
  return 2.0 * acc;
}

// Relative L1 distance between |psi(X)|^2 and the far-field form
// |phi~(k)|^2 / (2 s), k = X' / (2 s), over k in [-k_max, k_max].
inline double far_field_l1(const std::vector<cplx>& a, double s, double k_max, int points = 241) {
  const int n = static_cast<int>(a.size());
  const auto z = gbarq::airy_zeros(n);
  const SampledState st = sample_modes(z, a);
  double num = 0, den = 0;
  for (int i = 0; i < points; ++i) {
    const double k = -k_max + 2.0 * k_max * i / (points - 1);
    const double X = 2.0 * s * k - s * s;
    const auto [p, q] = gbarq::propagate_sampled(st.rule.nodes, st.rule.weights, st.psi, s, X);
    cplx ft{};
    for (int m = 1; m <= n; ++m) ft += a[m - 1] * gbarq::eigenfunction_momentum_dimless(gbarq::mode(z, m), k);
    const double ff = std::norm(ft) / (2.0 * s);
    num += std::abs(std::norm(p) - ff);
    den += ff;
  }
  return num / den;
}

// Largest relative deviation of K^g(z, Z) from exp(-i Phi) K^0(z, Z') over
// pseudo-random triples (z, Z in +-50 um, tau in [0.1, 5] ms).
inline double factorization_error(int samples, double g = 9.81) {
  double worst = 0;
  std::uint64_t state = 12345;
  auto u = [&state] {
    state = gbarq::splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < samples; ++i) {
    const double z = (u() - 0.5) * 1e-4, Z = (u() - 0.5) * 1e-4, tau = 1e-4 + u() * 4.9e-3;
    const cplx k = gbarq::propagator_kernel(z, Z, tau, g);
    const cplx k0 = gbarq::propagator_kernel(z, gbarq::shifted_altitude(Z, tau, g), tau, 0.0);
    const cplx f = std::polar(1.0, -gbarq::gravity_phase(Z, tau, g)) * k0;
    worst = std::max(worst, std::abs(k - f) / std::abs(k));
  }
  return worst;
}

}  // namespace oracle
