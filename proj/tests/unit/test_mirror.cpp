#include <gtest/gtest.h>

#include "gbarq/mirror.hpp"
#include "gbarq/quadrature.hpp"

using namespace gbarq;

constexpr double kMicroEV = 1e-6 * 1.602176634e-19;

TEST(TimeAboveMirror, Examples) {
  const Geometry g{0.05, 0.30};
  const auto a = time_above_mirror(0.302, 0.296, g);
  EXPECT_NEAR(a.t, 0.296 * 0.05 / 0.302, 1e-15);
  EXPECT_NEAR(a.t, 0.049, 0.0005);
  EXPECT_NEAR(a.v_bar, 0.302 / 0.296, 1e-15);
  EXPECT_DOUBLE_EQ(time_above_mirror(0.05, 0.3, g).t, 0.3);
  // v_bar = 1 m/s
  EXPECT_NEAR(time_above_mirror(0.3, 0.3, g).t, 0.05, 1e-15);
  EXPECT_THROW(time_above_mirror(0.04, 0.3, g), DomainError);
  EXPECT_THROW(time_above_mirror(0.0, 0.3, g), DomainError);
  EXPECT_THROW(time_above_mirror(0.3, -1.0, g), DomainError);
}

TEST(Geometry, Validate) {
  EXPECT_NO_THROW((Geometry{0.05, 0.3}.validate()));
  EXPECT_THROW((Geometry{0.0, 0.3}.validate()), DomainError);
  EXPECT_THROW((Geometry{0.05, -0.3}.validate()), DomainError);
}

namespace {

ModeAmplitudes some_amplitudes(int n) {
  ModeAmplitudes a;
  for (int k = 1; k <= n; ++k) a.c.push_back(std::polar(1.0 / k, 0.3 * k));
  return a;
}

}  // namespace

TEST(Evolve, PhasesOnly) {
  const GQSBasis b = build_basis(20, derive_scales(9.81));
  const auto a = some_amplitudes(20);
  const auto same = evolve_to_end_of_disk(a, 0.0, b);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(same.c[k], a.c[k]);
  const auto e = evolve_to_end_of_disk(a, 0.049, b);
  EXPECT_NEAR(e.norm2(), a.norm2(), 1e-14);
  for (int k = 0; k < 20; ++k) EXPECT_NEAR(std::abs(e.c[k]), std::abs(a.c[k]), 1e-15);
  EXPECT_THROW(evolve_to_end_of_disk(a, -1e-3, b), DomainError);
}

TEST(Evolve, TwoModeRephasing) {
  const ScaleSet s = derive_scales(9.81);
  const GQSBasis b = build_basis(2, s);
  ModeAmplitudes a;
  a.c = {1.0, 1.0};
  const double period = 2 * std::numbers::pi * s.t_g / (b.lambda(2) - b.lambda(1));
  const auto e0 = evolve_to_end_of_disk(a, 0.01, b);
  const auto e1 = evolve_to_end_of_disk(a, 0.01 + period, b);
  const auto eh = evolve_to_end_of_disk(a, 0.01 + 0.5 * period, b);
  const auto rel = [](const ModeAmplitudes& x) { return x.c[1] / x.c[0]; };
  EXPECT_NEAR(std::abs(rel(e1) - rel(e0)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(rel(eh) + rel(e0)), 0.0, 1e-9);
}

class EndDistribution : public ::testing::Test {
 protected:
  void SetUp() override {
    basis = build_basis(50, derive_scales(9.81));
    trap = build_trap(20e3);
    law = dipole_rings(build_photodetach(10 * kMicroEV));
    amps = ring_amplitudes(basis, trap, law);
  }
  GQSBasis basis;
  TrapConfig trap;
  RecoilLaw law;
  std::vector<ModeAmplitudes> amps;
};

TEST_F(EndDistribution, MarginalIntegratesToTransmittedFraction) {
  const double pg = basis.scales.p_g();
  const double P_cut = 40;
  const auto r = panel_gauss_legendre(-P_cut, P_cut, 0.1, 8);
  std::vector<double> p(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) p[i] = r.nodes[i] * pg;
  const auto pi = momentum_distribution_end(p, {0.0, 0.049}, basis, law, amps);
  const double frac = transmitted_fraction(amps, law, 0).fraction;
  for (int it = 0; it < 2; ++it) {
    double acc = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      acc += r.weights[i] * pg * pi[it * r.size() + i];
      EXPECT_GE(pi[it * r.size() + i], 0.0);
    }
    EXPECT_NEAR(acc, frac, 1e-3);
  }
}

TEST_F(EndDistribution, SingleModeIsStationary) {
  const GQSBasis b1 = build_basis(1, basis.scales);
  const auto a1 = ring_amplitudes(b1, trap, law);
  std::vector<double> p;
  for (int i = -20; i <= 20; ++i) p.push_back(0.1 * i * b1.scales.p_g());
  const auto pi = momentum_distribution_end(p, {0.0, 0.013, 0.049}, b1, law, a1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(pi[p.size() + i], pi[i], 1e-12 * pi[i] + 1e-300);
    EXPECT_NEAR(pi[2 * p.size() + i], pi[i], 1e-12 * pi[i] + 1e-300);
  }
}

TEST_F(EndDistribution, FringesSurviveRecoilAverage) {
  // contrast between neighbouring extrema in the central window
  const double pg = basis.scales.p_g();
  std::vector<double> p;
  for (int i = -150; i <= 150; ++i) p.push_back(0.01 * i * pg);
  for (double t : {0.03, 0.049}) {
    const auto pi = momentum_distribution_end(p, {t}, basis, law, amps);
    const double peak = *std::max_element(pi.begin(), pi.end());
    double best = 0;
    for (std::size_t i = 1; i + 1 < pi.size(); ++i) {
      if (!(pi[i] >= pi[i - 1] && pi[i] >= pi[i + 1])) continue;
      // nearest minimum on either side
      std::size_t l = i, r = i;
      while (l > 0 && pi[l - 1] <= pi[l]) --l;
      while (r + 1 < pi.size() && pi[r + 1] <= pi[r]) ++r;
      best = std::max(best, pi[i] - std::max(pi[l], pi[r]));
    }
    EXPECT_GT(best, 0.1 * peak) << t;
  }
}

TEST_F(EndDistribution, FringesDriftWithTime) {
  const double pg = basis.scales.p_g();
  std::vector<double> p;
  for (int i = -100; i <= 100; ++i) p.push_back(0.02 * i * pg);
  const auto pi = momentum_distribution_end(p, {0.040, 0.041}, basis, law, amps);
  double diff = 0, tot = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    diff += std::abs(pi[i] - pi[p.size() + i]);
    tot += pi[i];
  }
  EXPECT_GT(diff / tot, 0.05);
}

TEST_F(EndDistribution, PointFormConsistentWithMarginal) {
  // integrating the full distribution over the horizontal plane recovers
  // the vertical marginal
  const double pz = 0.37 * basis.scales.p_g();
  const double t = 0.049;
  const double marg = momentum_distribution_end({pz}, {t}, basis, law, amps)[0];
  const double q = law.q_mag, dp = trap.delta_p;
  const auto rr = panel_gauss_legendre(0.0, q + 8 * dp, 0.5 * dp, 6);
  const int nphi = 160;
  double acc = 0;
  for (std::size_t i = 0; i < rr.size(); ++i)
    for (int k = 0; k < nphi; ++k) {
      const double ph = 2 * std::numbers::pi * (k + 0.5) / nphi;
      acc += rr.weights[i] * rr.nodes[i] * (2 * std::numbers::pi / nphi) *
             momentum_distribution_end_point(rr.nodes[i] * std::cos(ph), rr.nodes[i] * std::sin(ph), pz, t, basis, trap,
                                             law, amps);
    }
  EXPECT_NEAR(acc / marg, 1.0, 1e-5);
}
