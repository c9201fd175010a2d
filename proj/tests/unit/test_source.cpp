#include <gtest/gtest.h>

#include "gbarq/quadrature.hpp"
#include "gbarq/source.hpp"

using namespace gbarq;

constexpr double kMicroEV = 1e-6 * 1.602176634e-19;

TEST(Trap, QuotedNumbers) {
  const TrapConfig t = build_trap(20e3);
  const double dv = t.delta_p / constants().m_atom;
  // 30-digit evaluations of the defining formulas
  EXPECT_NEAR(t.zeta / 5.0073193740917619844e-7, 1.0, 1e-13);
  EXPECT_NEAR(dv / 0.0629238310392980844, 1.0, 1e-13);
  // quoted: 0.5 um and 6.3 cm/s
  EXPECT_NEAR(t.zeta, 0.5e-6, 0.01 * 0.5e-6);
  EXPECT_NEAR(dv, 0.063, 0.01 * 0.063);
  EXPECT_DOUBLE_EQ(t.h, 10e-6);
}

TEST(Trap, Invariants) {
  for (double f : {1e3, 20e3, 3e5}) {
    const TrapConfig t = build_trap(f);
    const double w = 2 * std::numbers::pi * f;
    EXPECT_NEAR(t.zeta / std::sqrt(constants().hbar / (2 * constants().m_atom * w)), 1.0, 1e-14);
    EXPECT_NEAR(t.zeta * t.delta_p / (constants().hbar / 2), 1.0, 1e-12);
  }
  EXPECT_NEAR(build_trap(80e3).zeta / build_trap(20e3).zeta, 0.5, 1e-15);
  EXPECT_THROW(build_trap(0.0), DomainError);
  EXPECT_THROW(build_trap(-5.0), DomainError);
}

TEST(Photodetach, RecoilVelocity) {
  const auto pd = build_photodetach(10 * kMicroEV);
  EXPECT_NEAR(pd.v_r / 1.02091356838812300816, 1.0, 1e-13);
  EXPECT_NEAR(pd.v_r, 1.02, 0.01 * 1.02);
  EXPECT_NEAR(pd.q_mag / std::sqrt(2 * constants().m_positron * 10 * kMicroEV), 1.0, 1e-14);
  EXPECT_EQ(build_photodetach(0.0).v_r, 0.0);
  EXPECT_NEAR(build_photodetach(40 * kMicroEV).v_r / pd.v_r, 2.0, 1e-14);
  EXPECT_THROW(build_photodetach(-kMicroEV), DomainError);
}

TEST(Photodetach, AxisNormalized) {
  const auto pd = build_photodetach(kMicroEV, {0, 3, 4});
  EXPECT_NEAR(norm(pd.pol_axis), 1.0, 1e-15);
  EXPECT_NEAR(pd.pol_axis.y, 0.6, 1e-15);
  EXPECT_THROW(build_photodetach(kMicroEV, {0, 0, 0}), DomainError);
}

TEST(RecoilQuadrature, Moments) {
  for (Vec3 axis : {Vec3{0, 1, 0}, Vec3{0, 0, 1}, Vec3{1, 1, 1}}) {
    const auto nodes = recoil_quadrature(axis);
    const Vec3 n = (1.0 / norm(axis)) * axis;
    double w = 0, m2 = 0;
    Vec3 m1{0, 0, 0};
    for (const auto& q : nodes) {
      w += q.weight;
      m2 += q.weight * dot(q.q_hat, n) * dot(q.q_hat, n);
      m1 = m1 + q.weight * q.q_hat;
      EXPECT_NEAR(norm(q.q_hat), 1.0, 1e-14);
    }
    EXPECT_NEAR(w, 1.0, 1e-12);
    EXPECT_NEAR(m2, 0.6, 1e-12);
    EXPECT_LT(norm(m1), 1e-12);
  }
  EXPECT_THROW(recoil_quadrature({0, 1, 0}, {1, 16}), DomainError);
  EXPECT_THROW(recoil_quadrature({0, 1, 0}, {24, 3}), DomainError);
}

TEST(RecoilRings, ReproduceDipoleMoments) {
  // ring rule with analytic azimuth: weights sum to 1 and the vertical
  // second moment of 3 (q.n)^2 / 4pi is 1/5 for a horizontal axis, 3/5 for a
  // vertical one
  const auto horiz = dipole_rings(build_photodetach(10 * kMicroEV, {0, 1, 0}));
  const auto vert = dipole_rings(build_photodetach(10 * kMicroEV, {0, 0, 1}));
  double w = 0, u2 = 0;
  for (const auto& r : horiz.rings) {
    w += r.weight;
    u2 += r.weight * r.u * r.u;
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
  EXPECT_NEAR(u2, 0.2, 1e-12);
  w = u2 = 0;
  for (const auto& r : vert.rings) {
    w += r.weight;
    u2 += r.weight * r.u * r.u;
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
  EXPECT_NEAR(u2, 0.6, 1e-12);
}

TEST(RecoilRings, AzimuthProfileMatchesProductRule) {
  // horizontal Gaussian smearing of the dipole law at one momentum, once
  // through the rings and once through the brute-force product rule
  const auto pd = build_photodetach(10 * kMicroEV, {1, 2, 1.5});
  const auto law = dipole_rings(pd, {0.02, 8});
  const auto nodes = recoil_quadrature(pd.pol_axis, {64, 256});
  const double dp = build_trap(20e3).delta_p;
  const double p = 0.9 * pd.q_mag;
  for (double Phi : {-2.0, 0.3, 1.4}) {
    const double px = p * std::cos(Phi), py = p * std::sin(Phi);
    double brute = 0;
    for (const auto& q : nodes) {
      const double dx = px - pd.q_mag * q.q_hat.x, dy = py - pd.q_mag * q.q_hat.y;
      brute += q.weight * std::exp(-(dx * dx + dy * dy) / (2 * dp * dp));
    }
    double rings = 0;
    for (const auto& r : law.rings) {
      const double kappa = p * r.q_perp / (dp * dp);
      const double d = p - r.q_perp;
      rings += r.weight * std::exp(-d * d / (2 * dp * dp)) * ring_azimuth_profile(r, kappa, Phi);
    }
    EXPECT_NEAR(rings / brute, 1.0, 2e-3) << Phi;
  }
}

TEST(InitialWavefunction, Properties) {
  const TrapConfig t = build_trap(20e3);
  const auto s0 = initial_wavefunction(t, {0, 0, 0});
  const auto s1 = initial_wavefunction(t, {1e-27, -2e-27, 3e-27});
  const auto r = panel_gauss_legendre(t.h - 12 * t.zeta, t.h + 12 * t.zeta, 0.1 * t.zeta, 16);
  double n0 = 0, n1 = 0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    n0 += r.weights[j] * std::norm(s0.psi0(r.nodes[j]));
    n1 += r.weights[j] * std::norm(s1.psi0(r.nodes[j]));
  }
  EXPECT_NEAR(n0, 1.0, 1e-10);
  EXPECT_NEAR(n1, 1.0, 1e-10);
  for (double d : {0.1e-6, 0.7e-6}) {
    EXPECT_EQ(s0.psi0(t.h + d).imag(), 0.0);
    EXPECT_NEAR(s0.psi0(t.h + d).real(), s0.psi0(t.h - d).real(), 1e-12 * s0.psi0(t.h).real());
  }
  // horizontal momentum Gaussian: unit mass, centred on q
  const double dp = t.delta_p;
  const auto rp = panel_gauss_legendre(-10 * dp, 10 * dp, 0.2 * dp, 16);
  double m = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < rp.size(); ++i)
    for (std::size_t j = 0; j < rp.size(); ++j) {
      const double px = s1.qx + rp.nodes[i], py = s1.qy + rp.nodes[j];
      const double w = rp.weights[i] * rp.weights[j] * std::norm(s1.phi_tilde(px, py));
      m += w;
      mx += w * px;
      my += w * py;
    }
  EXPECT_NEAR(m, 1.0, 1e-10);
  EXPECT_NEAR(mx / m / s1.qx, 1.0, 1e-10);
  EXPECT_NEAR(my / m / s1.qy, 1.0, 1e-10);
}

namespace {

// integral of Pi_0 over a spherical shell grid, with the shell centred at v_r
double integrate_pi0(const RecoilLaw& law, double v_r, double dv) {
  // the ring sum is smooth in direction, so the angular rule can be coarse
  const auto rr = panel_gauss_legendre(std::max(0.0, v_r - 7 * dv), v_r + 7 * dv, 1.75 * dv, 8);
  const auto rc = panel_gauss_legendre(-1, 1, 0.25, 6);
  const int nphi = 48;
  double acc = 0;
  for (std::size_t a = 0; a < rr.size(); ++a)
    for (std::size_t b = 0; b < rc.size(); ++b)
      for (int k = 0; k < nphi; ++k) {
        const double v = rr.nodes[a], c = rc.nodes[b], s = std::sqrt(1 - c * c);
        const double ph = 2 * std::numbers::pi * k / nphi;
        const Vec3 vel{v * s * std::cos(ph), v * s * std::sin(ph), v * c};
        acc += rr.weights[a] * rc.weights[b] * (2 * std::numbers::pi / nphi) * v * v * velocity_distribution(vel, law, dv);
      }
  return acc;
}

}  // namespace

TEST(VelocityDistribution, ShellShapeAndNormalization) {
  const auto pd = build_photodetach(10 * kMicroEV);
  const auto law = dipole_rings(pd);
  const double dv = build_trap(20e3).delta_p / constants().m_atom;
  // coarse ring set for the 3D normalization; ring spacing stays below dv / v_r
  EXPECT_NEAR(integrate_pi0(dipole_rings(pd, {0.25, 8}), pd.v_r, dv), 1.0, 1e-4);
  // polarization along y: the y pole is denser than the z pole
  EXPECT_GT(velocity_distribution({0, pd.v_r, 0}, law, dv), velocity_distribution({0, 0, pd.v_r}, law, dv));
  // radial profile along y peaks near v_r with a width near dv
  double best = 0, best_v = 0;
  std::vector<double> prof;
  for (double v = 0.7; v <= 1.3; v += 0.001) {
    const double p = velocity_distribution({0, v, 0}, law, dv);
    prof.push_back(p);
    if (p > best) {
      best = p;
      best_v = v;
    }
  }
  EXPECT_NEAR(best_v, 1.02, 0.01);
  double above = 0;
  for (double p : prof) above += p > best * std::exp(-0.5) ? 0.001 : 0.0;
  EXPECT_NEAR(above / 2, 0.063, 0.004);
}

TEST(VelocityDistribution, Parity) {
  const auto law = dipole_rings(build_photodetach(10 * kMicroEV, {0.3, 1, 0.5}));
  const double dv = 0.063;
  for (Vec3 v : {Vec3{0.2, 0.9, 0.1}, Vec3{-0.5, 0.3, 0.7}, Vec3{0.01, -1.0, 0.2}}) {
    const double a = velocity_distribution(v, law, dv), b = velocity_distribution(-1.0 * v, law, dv);
    EXPECT_NEAR(a, b, 1e-9 * std::max(a, 1e-300));
  }
}

TEST(KickLaw, SingleFixedRing) {
  const auto law = kick_law({1.02, std::numbers::pi / 2});
  ASSERT_EQ(law.rings.size(), 1u);
  EXPECT_TRUE(law.rings[0].fixed_azimuth);
  EXPECT_DOUBLE_EQ(law.total_weight(), 1.0);
  EXPECT_NEAR(law.rings[0].q_perp / constants().m_atom, 1.02, 1e-14);
  EXPECT_THROW(kick_law({-1.0}), DomainError);
}
