#include <gtest/gtest.h>

#include <boost/math/special_functions/airy.hpp>

#include "gbarq/gqs.hpp"
#include "gbarq/quadrature.hpp"

using namespace gbarq;

namespace {

constexpr double kMicroEV = 1e-6 * 1.602176634e-19;

// Gaussian-smoothed Airy function:
//   int Ai(u) exp(-(u - c)^2 / (2 s2)) du = sqrt(2 pi s2) exp(s2 c / 2 + s2^3 / 12) Ai(c + s2^2 / 4)
double smoothed_airy(double c, double s2) {
  return std::sqrt(2 * std::numbers::pi * s2) * std::exp(s2 * c / 2 + s2 * s2 * s2 / 12) *
         boost::math::airy_ai(c + s2 * s2 / 4);
}

// c_n with the lower integration bound pushed to -infinity
double extended_overlap(const TrapConfig& t, const ScaleSet& s, double lambda, double aiprime) {
  const double zeta = t.zeta / s.l_g, h = t.h / s.l_g;
  const double s2 = 2 * zeta * zeta;
  return std::pow(2 * std::numbers::pi * zeta * zeta, -0.25) * smoothed_airy(h - lambda, s2) / aiprime;
}

}  // namespace

TEST(Overlap, SmoothedAiryIdentity) {
  // the closed form against a brute-force fine-grid integral
  for (double c : {-3.0, -0.5, 1.0}) {
    for (double s2 : {0.01, 0.3}) {
      const double w = std::sqrt(s2);
      const auto r = panel_gauss_legendre(c - 14 * w, c + 14 * w, 0.02 * w, 16);
      double acc = 0;
      for (std::size_t j = 0; j < r.size(); ++j)
        acc += r.weights[j] * boost::math::airy_ai(r.nodes[j]) * std::exp(-(r.nodes[j] - c) * (r.nodes[j] - c) / (2 * s2));
      EXPECT_NEAR(acc / smoothed_airy(c, s2), 1.0, 1e-12);
    }
  }
}

TEST(Overlap, MatchesExtendedGaussianForm) {
  const ScaleSet s = derive_scales(9.81);
  const TrapConfig t = build_trap(20e3);  // zeta / h = 0.05
  ASSERT_NEAR(t.zeta / t.h, 0.05, 1e-3);
  const GQSBasis b = build_basis(400, s);
  const auto a = overlap_coefficients(initial_wavefunction(t, {0, 0, 0}), b);
  double peak = 0;
  for (const auto& c : a.c) peak = std::max(peak, std::abs(c));
  int checked = 0;
  for (int n = 1; n <= 400; ++n) {
    const double c = a.c[n - 1].real();
    if (std::abs(c) < 0.1 * peak) continue;
    const double ref = extended_overlap(t, s, b.lambda(n), b.zeros->aiprime(n));
    EXPECT_NEAR(c / ref, 1.0, 1e-3) << n;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Overlap, RealWithoutVerticalRecoil) {
  const GQSBasis b = build_basis(200, derive_scales(9.81));
  const auto a = overlap_coefficients(initial_wavefunction(build_trap(20e3), {0.1, 0.2, 0}), b);
  for (const auto& c : a.c) EXPECT_EQ(c.imag(), 0.0);
}

TEST(Overlap, Completeness) {
  const ScaleSet s = derive_scales(9.81);
  const TrapConfig t = build_trap(20e3);
  const auto psi = initial_wavefunction(t, {0, 0, 0});
  double prev = 0;
  for (int n : {250, 1000, 3000}) {
    const double sum = overlap_coefficients(psi, build_basis(n, s)).norm2();
    EXPECT_GE(sum, prev);
    EXPECT_LE(sum, 1.0 + 1e-9);
    prev = sum;
  }
  // the Gaussian lies 20 widths above the floor, so the half-line mass is 1
  EXPECT_NEAR(prev, 1.0, 1e-4);
}

TEST(Overlap, BesselBound) {
  const ScaleSet s = derive_scales(9.81);
  const TrapConfig t = build_trap(20e3);
  const GQSBasis b = build_basis(300, s);
  const double q = build_photodetach(10 * kMicroEV).q_mag;
  const OverlapEngine eng(b, t, q);
  for (double u : {-1.0, -0.4, 0.0, 0.3, 1.0}) EXPECT_LE(eng.amplitudes(u * q).norm2(), 1.0 + 1e-9);
  EXPECT_THROW(eng.amplitudes(1.5 * q), DomainError);
}

TEST(Basis, Invariants) {
  const ScaleSet s = derive_scales(9.81);
  const GQSBasis b = build_basis(1000, s);
  EXPECT_GE(b.z_max, b.lambda(1000) * s.l_g);
  EXPECT_NEAR(b.z_max / ((b.lambda(1000) + 10) * s.l_g), 1.0, 1e-14);
  EXPECT_NEAR(b.z_max, 1.7e-3, 0.1e-3);
  EXPECT_THROW(build_basis(0, s), DomainError);
  EXPECT_THROW(build_basis(10, s, 1e-6), DomainError);
}

TEST(Transmission, NoStatesRetained) {
  const auto law = dipole_rings(build_photodetach(10 * kMicroEV));
  const auto r = transmitted_fraction(build_trap(20e3), law, 0, derive_scales(9.81), 1000);
  EXPECT_EQ(r.fraction, 0.0);
  EXPECT_EQ(r.n_c, 0);
}

TEST(Transmission, MonotoneInNmax) {
  const auto law = dipole_rings(build_photodetach(10 * kMicroEV));
  const ScaleSet s = derive_scales(9.81);
  double prev = 0;
  for (int n : {5, 10, 20, 40, 80}) {
    const double f = transmitted_fraction(build_trap(20e3), law, n, s, 1000).fraction;
    EXPECT_GE(f, prev) << n;
    prev = f;
  }
}

TEST(Transmission, FullConfiguration) {
  const auto law = dipole_rings(build_photodetach(10 * kMicroEV));
  const auto r = transmitted_fraction(build_trap(20e3), law, 1000, derive_scales(9.81), 1000);
  EXPECT_NEAR(r.fraction, 0.26, 0.02);
  EXPECT_EQ(r.n_c, 260);
}

TEST(Transmission, HorizontalKick) {
  const auto law = kick_law({1.02});
  const auto r = transmitted_fraction(build_trap(20e3), law, 1000, derive_scales(9.81), 1000);
  EXPECT_NEAR(static_cast<double>(r.n_c), 995.0, 2.0);
}

TEST(Transmission, AngularRuleConverged) {
  // ring rule at two resolutions and the brute-force product rule over the
  // sphere all agree
  const ScaleSet s = derive_scales(9.81);
  const TrapConfig t = build_trap(20e3);
  const GQSBasis b = build_basis(200, s);
  const auto pd = build_photodetach(10 * kMicroEV);
  const auto coarse = dipole_rings(pd, {0.05, 8});
  const auto fine = dipole_rings(pd, {0.025, 16});
  const double fc = transmitted_fraction(ring_amplitudes(b, t, coarse), coarse, 0).fraction;
  const double ff = transmitted_fraction(ring_amplitudes(b, t, fine), fine, 0).fraction;
  EXPECT_NEAR(fc / ff, 1.0, 1e-4);
  for (RecoilOrder o : {RecoilOrder{48, 64}, RecoilOrder{96, 128}}) {
    const auto nodes = recoil_quadrature(pd.pol_axis, o);
    const OverlapEngine eng(b, t, pd.q_mag);
    double f = 0;
    for (const auto& n : nodes) f += n.weight * eng.amplitudes(pd.q_mag * n.q_hat.z).norm2();
    EXPECT_NEAR(f / ff, 1.0, 1e-4) << o.polar;
  }
}

TEST(ModeTable, QuadratureNormalizesModes) {
  const auto tab = shared_mode_table(30, 0.5, 16);
  const auto z = shared_zero_table(30);
  for (int n = 1; n <= 30; ++n) {
    const GQSMode md = mode(*z, n);
    double acc = 0;
    for (std::size_t j = 0; j < tab->support(n); ++j) acc += tab->values(n)[j] * eigenfunction_dimless(md, tab->x()[j]);
    EXPECT_NEAR(acc, 1.0, 1e-10) << n;
  }
  EXPECT_EQ(shared_mode_table(30, 0.5, 16).get(), tab.get());
}
