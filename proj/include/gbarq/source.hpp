#pragma once
// Initial state of the atom: ion-trap ground state, photo-detachment recoil
// and the resulting velocity distribution.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "gbarq/bessel.hpp"
#include "gbarq/errors.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/quadrature.hpp"
#include "gbarq/vec3.hpp"

namespace gbarq {

struct TrapConfig {
  double f = 0;        // Hz
  double h = 0;        // m, release height above the mirror
  double zeta = 0;     // m
  double delta_p = 0;  // kg m/s
};

inline TrapConfig build_trap(double f, double h = 10e-6, const PhysicalConstants& pc = constants()) {
  if (!(f > 0) || !std::isfinite(f)) throw DomainError("build_trap: trap frequency must be positive");
  if (!(h > 0)) throw DomainError("build_trap: release height must be positive");
  const double omega = 2.0 * std::numbers::pi * f;
  TrapConfig t;
  t.f = f;
  t.h = h;
  t.zeta = std::sqrt(pc.hbar / (2.0 * pc.m_atom * omega));
  t.delta_p = pc.hbar / (2.0 * t.zeta);
  return t;
}

struct PhotodetachConfig {
  double delta_E = 0;  // J
  double q_mag = 0;    // kg m/s
  double v_r = 0;      // m/s
  Vec3 pol_axis{0, 1, 0};
};

inline PhotodetachConfig build_photodetach(double delta_E, Vec3 pol_axis = {0, 1, 0},
                                           const PhysicalConstants& pc = constants()) {
  if (!(delta_E >= 0) || !std::isfinite(delta_E)) throw DomainError("build_photodetach: delta_E must be >= 0");
  const double len = norm(pol_axis);
  if (!(len > 0) || !std::isfinite(len)) throw DomainError("build_photodetach: polarization axis must be non-zero");
  PhotodetachConfig p;
  p.delta_E = delta_E;
  p.q_mag = std::sqrt(2.0 * pc.m_positron * delta_E);
  p.v_r = p.q_mag / pc.m_atom;
  p.pol_axis = (1.0 / len) * pol_axis;
  return p;
}

// ---------------------------------------------------------------------------
// Angular quadrature over the recoil direction

struct RecoilNode {
  Vec3 q_hat;
  double weight = 0;
};

struct RecoilOrder {
  int polar = 48;
  int azimuth = 64;  // the narrow transmitted band in q_z needs >= 64 here
};

// Product rule about the polarization axis: Gauss-Legendre in cos(theta),
// trapezoid in azimuth, weights 3 cos^2(theta) / 4pi dOmega.
inline std::vector<RecoilNode> recoil_quadrature(Vec3 pol_axis, RecoilOrder order = {}) {
  if (order.polar < 2 || order.azimuth < 4) throw DomainError("recoil_quadrature: need polar >= 2 and azimuth >= 4");
  const double len = norm(pol_axis);
  if (!(len > 0)) throw DomainError("recoil_quadrature: zero polarization axis");
  const Vec3 n = (1.0 / len) * pol_axis;
  // orthonormal frame (e1, e2, n)
  Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = helper - dot(helper, n) * n;
  e1 = (1.0 / norm(e1)) * e1;
  const Vec3 e2{n.y * e1.z - n.z * e1.y, n.z * e1.x - n.x * e1.z, n.x * e1.y - n.y * e1.x};

  const QuadratureRule gl = gauss_legendre(order.polar);
  std::vector<RecoilNode> nodes;
  nodes.reserve(static_cast<std::size_t>(order.polar) * order.azimuth);
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double w = 1.5 * c * c * gl.weights[i] / order.azimuth;  // (3/4pi) c^2 dc (2pi/N)
    for (int k = 0; k < order.azimuth; ++k) {
      const double phi = 2.0 * std::numbers::pi * (k + 0.5) / order.azimuth;
      const Vec3 q = s * std::cos(phi) * e1 + s * std::sin(phi) * e2 + c * n;
      nodes.push_back({q, w});
    }
  }
  return nodes;
}

// Recoil law used downstream. Directions are grouped into rings of constant
// vertical component u = q_z / q; the azimuth around the vertical is carried
// analytically. For a dipolar law with axis n = (n_perp cos a, n_perp sin a, n_z)
// the ring density per du, integrated against exp(k cos(phi - Phi)), is
//   c0 I0(k) + c1 cos(Phi - a) I1(k) + c2 cos(2(Phi - a)) I2(k)
// with c0 = 3/4 (s^2 n_perp^2 + 2 u^2 n_z^2), c1 = 3 s u n_perp n_z,
// c2 = 3/4 s^2 n_perp^2 and s^2 = 1 - u^2.
struct RecoilRing {
  double u = 0;        // vertical direction cosine
  double q_perp = 0;   // kg m/s
  double q_z = 0;      // kg m/s
  double weight = 0;   // probability of the ring; sums to 1
  double c1 = 0;       // azimuth harmonics relative to c0
  double c2 = 0;
  double alpha = 0;    // azimuth of the horizontal part of the axis (or of the kick)
  bool fixed_azimuth = false;
};

struct RingOrder {
  double panel_width = 0.05;  // in u
  int nodes = 8;
};

// Optional deterministic horizontal kick replacing the photo-detachment recoil.
struct KickConfig {
  double v = 0;      // m/s
  double alpha = std::numbers::pi / 2;  // azimuth; default along y
};

struct RecoilLaw {
  std::vector<RecoilRing> rings;
  double q_mag = 0;

  double total_weight() const {
    double s = 0;
    for (const auto& r : rings) s += r.weight;
    return s;
  }
};

inline RecoilLaw dipole_rings(const PhotodetachConfig& pd, RingOrder order = {}) {
  if (!(order.panel_width > 0) || order.nodes < 2) throw DomainError("dipole_rings: degenerate ring order");
  RecoilLaw law;
  law.q_mag = pd.q_mag;
  const Vec3 n = pd.pol_axis;
  const double n_perp = std::hypot(n.x, n.y);
  const double alpha = n_perp > 0 ? std::atan2(n.y, n.x) : 0.0;
  if (pd.q_mag == 0) {
    law.rings.push_back({0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, false});
    return law;
  }
  const QuadratureRule rule = panel_gauss_legendre(-1.0, 1.0, order.panel_width, order.nodes);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.nodes[i];
    const double s2 = 1.0 - u * u;
    const double s = std::sqrt(std::max(0.0, s2));
    const double c0 = 0.75 * (s2 * n_perp * n_perp + 2.0 * u * u * n.z * n.z);
    if (c0 <= 0) continue;
    RecoilRing r;
    r.u = u;
    r.q_perp = pd.q_mag * s;
    r.q_z = pd.q_mag * u;
    r.weight = c0 * rule.weights[i];
    r.c1 = 3.0 * s * u * n_perp * n.z / c0;
    r.c2 = 0.75 * s2 * n_perp * n_perp / c0;
    r.alpha = alpha;
    law.rings.push_back(r);
  }
  return law;
}

inline RecoilLaw kick_law(const KickConfig& kick, const PhysicalConstants& pc = constants()) {
  if (!(kick.v >= 0)) throw DomainError("kick_law: kick velocity must be >= 0");
  RecoilLaw law;
  law.q_mag = pc.m_atom * kick.v;
  law.rings.push_back({0.0, law.q_mag, 0.0, 1.0, 0.0, 0.0, kick.alpha, true});
  return law;
}

// Normalized azimuthal profile of a ring at horizontal momentum direction Phi,
// multiplied by exp(-kappa): integrates to 2 pi I0(kappa) exp(-kappa) over Phi.
inline double ring_azimuth_profile(const RecoilRing& r, double kappa, double Phi) {
  if (r.fixed_azimuth) return std::exp(kappa * (std::cos(Phi - r.alpha) - 1.0));
  double v = scaled_bessel_i(0, kappa);
  if (r.c1 != 0) v += r.c1 * std::cos(Phi - r.alpha) * scaled_bessel_i(1, kappa);
  if (r.c2 != 0) v += r.c2 * std::cos(2.0 * (Phi - r.alpha)) * scaled_bessel_i(2, kappa);
  return v;
}

// ---------------------------------------------------------------------------
// Initial wavefunction

struct InitialState {
  // horizontal momentum Gaussian
  double qx = 0, qy = 0;  // kg m/s
  double delta_p = 0;
  // vertical position Gaussian
  double h = 0, zeta = 0, q_z = 0;
  double hbar = 0;

  // phi~_0(p) for the horizontal momentum (normalized over d^2p)
  double horizontal_density(double px, double py) const {
    const double dx = px - qx, dy = py - qy;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * delta_p * delta_p)) /
           (2.0 * std::numbers::pi * delta_p * delta_p);
  }
  std::complex<double> phi_tilde(double px, double py) const { return std::sqrt(horizontal_density(px, py)); }

  // psi_0(z) in m^(-1/2)
  std::complex<double> psi0(double z) const {
    const double dz = z - h;
    const double amp = std::pow(2.0 * std::numbers::pi * zeta * zeta, -0.25) * std::exp(-dz * dz / (4.0 * zeta * zeta));
    return amp * std::polar(1.0, q_z * dz / hbar);
  }
};

inline InitialState initial_wavefunction(const TrapConfig& trap, Vec3 q, const PhysicalConstants& pc = constants()) {
  InitialState s;
  s.qx = q.x;
  s.qy = q.y;
  s.delta_p = trap.delta_p;
  s.h = trap.h;
  s.zeta = trap.zeta;
  s.q_z = q.z;
  s.hbar = pc.hbar;
  return s;
}

// ---------------------------------------------------------------------------
// Velocity distribution

// Pi_0(v) in (m/s)^-3: isotropic Gaussian of width dv convolved with the
// recoil law. Exponents are combined before the Bessel factors so that the
// evaluation stays finite far from the shell.
inline double velocity_distribution(Vec3 v, const RecoilLaw& law, double delta_v, double m_atom = constants().m_atom) {
  const double v_perp = std::hypot(v.x, v.y);
  const double phi_v = std::atan2(v.y, v.x);
  const double norm3 = std::pow(2.0 * std::numbers::pi * delta_v * delta_v, -1.5);
  double acc = 0;
  for (const auto& r : law.rings) {
    const double w_perp = r.q_perp / m_atom;
    const double w_z = r.q_z / m_atom;
    const double dz = v.z - w_z;
    const double dp = v_perp - w_perp;
    const double kappa = v_perp * w_perp / (delta_v * delta_v);
    const double base = std::exp(-(dp * dp + dz * dz) / (2.0 * delta_v * delta_v));
    acc += r.weight * base * ring_azimuth_profile(r, kappa, phi_v);
  }
  return norm3 * acc;
}

}  // namespace gbarq
