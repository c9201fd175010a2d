#pragma once
// Free fall from the end of the mirror to the detector plane and the
// annihilation current on it.
//
// Dimensionless form (units of the current g): with s = tau / t_g,
// X = Z / l_g and X' = X + s^2,
//   K^g(x, X) = exp(-i Phi) (4 pi i s)^(-1/2) exp(i (X' - x)^2 / (4 s)),
//   Phi = s (X + s^2 / 3),
// and the detector-plane velocity operator (hbar / i m) d/dZ acts on the
// kernel as multiplication by V = (X' - x) / (2 s) - s in units of v_g.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "gbarq/bessel.hpp"
#include "gbarq/errors.hpp"
#include "gbarq/gqs.hpp"
#include "gbarq/mirror.hpp"
#include "gbarq/parallel.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/source.hpp"

namespace gbarq {

// ---------------------------------------------------------------------------
// Kernel

inline double classical_action(double z, double Z, double tau, double g) {
  return (Z - z) * (Z - z) / (2.0 * tau) - g * tau * (Z + z) / 2.0 - g * g * tau * tau * tau / 24.0;
}

// K in m^-1
inline cplx propagator_kernel(double z, double Z, double tau, double g, const PhysicalConstants& pc = constants()) {
  if (!(tau > 0)) throw DomainError("propagator_kernel: tau must be positive");
  const cplx pref = std::sqrt(cplx(0.0, -pc.m_atom / (2.0 * std::numbers::pi * pc.hbar * tau)));
  return pref * std::polar(1.0, pc.m_atom * classical_action(z, Z, tau, g) / pc.hbar);
}

inline double gravity_phase(double Z, double tau, double g, const PhysicalConstants& pc = constants()) {
  return pc.m_atom * g * tau / pc.hbar * (Z + g * tau * tau / 6.0);
}

inline double shifted_altitude(double Z, double tau, double g) { return Z + 0.5 * g * tau * tau; }

struct PropagationContext {
  double tau = 0;      // s
  double Z = 0;        // m
  double Z_prime = 0;  // m
  double Phi = 0;      // rad
  double g = 0;
};

inline PropagationContext make_context(double T, double t, double H, double g, const PhysicalConstants& pc = constants()) {
  const double tau = T - t;
  if (!(tau > 0)) throw DomainError("propagation context: tau = T - t must be positive");
  PropagationContext c;
  c.tau = tau;
  c.Z = -H;
  c.Z_prime = shifted_altitude(c.Z, tau, g);
  c.Phi = gravity_phase(c.Z, tau, g, pc);
  c.g = g;
  return c;
}

// ---------------------------------------------------------------------------
// Fresnel sums over the mode table

struct FresnelSums {
  double s = 0, Xp = 0;
  std::vector<cplx> F;  // int phi_n(x) exp(i (x^2 - 2 X' x) / (4 s)) dx
  std::vector<cplx> G;  // same with V(x) = (X' - x)/(2 s) - s inside
};

inline void check_fresnel_resolution(double spacing, double s, double Xp, double x_top, double lambda_max) {
  const double k_chirp = std::max(std::abs(Xp), std::abs(Xp - x_top)) / (2.0 * s);
  const double k = k_chirp + std::sqrt(std::max(lambda_max, 0.0));
  if (spacing * k > 2.0 * std::numbers::pi / 8.0) {
    std::ostringstream os;
    os << "fresnel quadrature unresolved: node spacing " << spacing << " vs local wavenumber " << k
       << " (s = " << s << ", X' = " << Xp << ")";
    throw NumericError(os.str());
  }
}

// x_cut bounds every integral (absorber height in units of l_g).
inline void fresnel_sums(const ModeTable& tab, int n_max, double x_cut, double s, double Xp, FresnelSums& out) {
  if (!(s > 0)) throw DomainError("fresnel_sums: s must be positive");
  const auto& x = tab.x();
  const std::size_t J = tab.support(n_max, x_cut);
  const double x_top = J > 0 ? x[J - 1] : 0.0;
  check_fresnel_resolution(tab.mean_spacing(), s, Xp, x_top, tab.zeros().lambda(n_max));
  std::vector<double> cr(J), ci(J), mr(J), mi(J);
  const double inv4s = 1.0 / (4.0 * s);
  for (std::size_t j = 0; j < J; ++j) {
    const double ph = (x[j] * x[j] - 2.0 * Xp * x[j]) * inv4s;
    cr[j] = std::cos(ph);
    ci[j] = std::sin(ph);
    mr[j] = x[j] * cr[j];
    mi[j] = x[j] * ci[j];
  }
  out.s = s;
  out.Xp = Xp;
  out.F.resize(n_max);
  out.G.resize(n_max);
  const double a = Xp / (2.0 * s) - s;
  const double b = 1.0 / (2.0 * s);
  for (int n = 1; n <= n_max; ++n) {
    const double* v = tab.values(n);
    const std::size_t len = std::min(tab.support(n), J);
    double fr = 0, fi = 0, gr = 0, gi = 0;
    for (std::size_t j = 0; j < len; ++j) {
      fr += v[j] * cr[j];
      fi += v[j] * ci[j];
      gr += v[j] * mr[j];
      gi += v[j] * mi[j];
    }
    const cplx F(fr, fi), M(gr, gi);
    out.F[n - 1] = F;
    out.G[n - 1] = a * F - b * M;
  }
}

// ---------------------------------------------------------------------------
// Detector wavefunction

struct DetectorField {
  cplx psi;   // m^-1/2
  cplx grad;  // (hbar / i m) d psi / dZ, (m/s) m^-1/2
};

// Amplitude-weighted sums; the common factor is restored by the callers.
inline std::pair<cplx, cplx> mode_sums(const std::vector<cplx>& a, const FresnelSums& fs) {
  cplx p{}, q{};
  const std::size_t n = std::min(a.size(), fs.F.size());
  for (std::size_t k = 0; k < n; ++k) {
    p += a[k] * fs.F[k];
    q += a[k] * fs.G[k];
  }
  return {p, q};
}

inline cplx detector_prefactor(double s, double Xp, double Phi) {
  return std::polar(1.0, Xp * Xp / (4.0 * s) - Phi) / std::sqrt(cplx(0.0, 4.0 * std::numbers::pi * s));
}

// psi and gradient at the detector from already phased mode amplitudes.
inline DetectorField detector_wavefunction(const ModeAmplitudes& phased, const PropagationContext& ctx,
                                           const GQSBasis& basis, const ModeTable& tab) {
  const ScaleSet& sc = basis.scales;
  const double s = ctx.tau / sc.t_g;
  const double Xp = ctx.Z_prime / sc.l_g;
  const double X = ctx.Z / sc.l_g;
  FresnelSums fs;
  fresnel_sums(tab, basis.n_max, basis.z_max / sc.l_g, s, Xp, fs);
  auto [p, q] = mode_sums(phased.c, fs);
  const cplx pre = detector_prefactor(s, Xp, s * (X + s * s / 3.0)) / std::sqrt(sc.l_g);
  return {pre * p, sc.v_g * pre * q};
}

// Propagation of an arbitrary state sampled on quadrature nodes (dimensionless
// x, weights, values psi(x)); no mirror involved. Returns dimensionless psi and
// gradient in units of v_g at detector altitude X after time s.
inline std::pair<cplx, cplx> propagate_sampled(std::span<const double> x, std::span<const double> w,
                                               std::span<const cplx> psi, double s, double X) {
  if (!(s > 0)) throw DomainError("propagate_sampled: s must be positive");
  const double Xp = X + s * s;
  cplx F{}, M{};
  for (std::size_t j = 0; j < x.size(); ++j) {
    const cplx c = std::polar(w[j], (x[j] * x[j] - 2.0 * Xp * x[j]) / (4.0 * s)) * psi[j];
    F += c;
    M += x[j] * c;
  }
  const cplx G = (Xp / (2.0 * s) - s) * F - M / (2.0 * s);
  const cplx pre = detector_prefactor(s, Xp, s * (X + s * s / 3.0));
  return {pre * F, pre * G};
}

inline double pure_state_current(const DetectorField& f) { return -std::real(std::conj(f.psi) * f.grad); }

// ---------------------------------------------------------------------------
// Full current model at one value of g

enum class Prefactor { kFallTime, kTotalTime };  // m^2/tau^2 as printed, or m^2/T^2

struct ModelSpec {
  double f = 20e3;               // Hz
  double h = 10e-6;              // m
  double delta_E = 10e-6 * 1.602176634e-19;  // J
  Vec3 pol_axis{0, 1, 0};
  std::optional<KickConfig> kick;  // replaces the photo-detachment recoil
  RingOrder rings{};
  Geometry geom{};
  int n_max = 1000;
  double z_max = 0;              // m; 0 means (lambda_nmax + 10) l_g at g_ref
  double fresnel_panel = 0.5;    // in l_g
  int fresnel_order = 16;
  Prefactor prefactor = Prefactor::kTotalTime;
  double ring_prune = 1e-14;     // drop rings with weight * sum|c|^2 below this
};

inline double resolved_z_max(const ModelSpec& spec, const PhysicalConstants& pc = constants()) {
  if (spec.z_max > 0) return spec.z_max;
  const auto zeros = shared_zero_table(spec.n_max);
  return default_absorber_dimless(zeros->lambda(spec.n_max)) * derive_scales(pc.g_ref, pc).l_g;
}

inline RecoilLaw build_recoil_law(const ModelSpec& spec, const PhysicalConstants& pc = constants()) {
  if (spec.kick) return kick_law(*spec.kick, pc);
  return dipole_rings(build_photodetach(spec.delta_E, spec.pol_axis, pc), spec.rings);
}

// Per-ring horizontal factors at one horizontal speed.
struct HorizontalWeights {
  std::vector<double> w;      // W_k exp(-(p - q_perp)^2 / 2 dp^2) I0e(kappa)
  std::vector<double> kappa;
};

class CurrentModel {
 public:
  CurrentModel(const ModelSpec& spec, double g, const PhysicalConstants& pc = constants())
      : spec_(spec), pc_(pc) {
    spec_.geom.validate();
    if (spec.n_max < 1) throw DomainError("current model: n_max must be >= 1");
    trap_ = build_trap(spec.f, spec.h, pc);
    basis_ = build_basis(spec.n_max, derive_scales(g, pc), resolved_z_max(spec, pc));
    law_full_ = build_recoil_law(spec, pc);
    auto amps = ring_amplitudes(basis_, trap_, law_full_);
    transmission_ = transmitted_fraction(amps, law_full_, 0);
    // keep rings that carry probability
    for (std::size_t k = 0; k < amps.size(); ++k) {
      if (law_full_.rings[k].weight * transmission_.per_ring[k] < spec.ring_prune) continue;
      law_.rings.push_back(law_full_.rings[k]);
      amps_.push_back(std::move(amps[k]));
    }
    law_.q_mag = law_full_.q_mag;
    table_ = shared_mode_table(spec.n_max, spec.fresnel_panel, spec.fresnel_order);
    x_cut_ = basis_.z_max / basis_.scales.l_g;
    const std::size_t K = amps_.size(), N = static_cast<std::size_t>(spec.n_max);
    C_.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < N; ++n) C_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = amps_[k].c[n];
  }

  const ModelSpec& spec() const { return spec_; }
  const ScaleSet& scales() const { return basis_.scales; }
  const GQSBasis& basis() const { return basis_; }
  const TrapConfig& trap() const { return trap_; }
  const RecoilLaw& law() const { return law_; }
  const std::vector<ModeAmplitudes>& amplitudes() const { return amps_; }
  double g() const { return basis_.scales.g; }
  double transmitted() const { return transmission_.fraction; }
  const ModeTable& table() const { return *table_; }

  // Per-ring pure-state currents j_k [1/s] at the detector for time t above
  // the mirror and fall time tau.
  void ring_currents(double t, double tau, std::vector<double>& j) const {
    const ScaleSet& sc = basis_.scales;
    const double s = tau / sc.t_g;
    const double Xp = -spec_.geom.H / sc.l_g + s * s;
    FresnelSums fs;
    fresnel_sums(*table_for(s, Xp), spec_.n_max, x_cut_, s, Xp, fs);
    const double st = t / sc.t_g;
    Eigen::VectorXcd bF(spec_.n_max), bG(spec_.n_max);
    for (int n = 0; n < spec_.n_max; ++n) {
      const cplx e = std::polar(1.0, -basis_.lambda(n + 1) * st);
      bF(n) = e * fs.F[n];
      bG(n) = e * fs.G[n];
    }
    const Eigen::VectorXcd pF = C_ * bF, pG = C_ * bG;
    const double unit = sc.v_g / sc.l_g / (4.0 * std::numbers::pi * s);
    j.resize(amps_.size());
    for (std::size_t k = 0; k < amps_.size(); ++k) {
      j[k] = -std::real(std::conj(pF(static_cast<Eigen::Index>(k))) * pG(static_cast<Eigen::Index>(k))) * unit;
    }
  }

  HorizontalWeights horizontal(double t) const {
    HorizontalWeights hw;
    const double p = pc_.m_atom * spec_.geom.d / t;
    const double dp2 = trap_.delta_p * trap_.delta_p;
    hw.w.resize(law_.rings.size());
    hw.kappa.resize(law_.rings.size());
    for (std::size_t k = 0; k < law_.rings.size(); ++k) {
      const auto& r = law_.rings[k];
      const double kappa = p * r.q_perp / dp2;
      const double dq = p - r.q_perp;
      hw.kappa[k] = kappa;
      hw.w[k] = r.weight * std::exp(-dq * dq / (2.0 * dp2)) * scaled_bessel_i(0, kappa);
    }
    return hw;
  }

  // Folded density in the (t, tau) plane, 1/s^2. Integrates to the
  // transmitted fraction.
  double density_t_tau(double t, double tau) const {
    if (!(t > 0) || !(tau > 0)) return 0.0;
    std::vector<double> j;
    ring_currents(t, tau, j);
    return density_from_rings(t, tau, j, horizontal(t));
  }

  double density_from_rings(double t, double tau, const std::vector<double>& j, const HorizontalWeights& hw) const {
    double acc = 0;
    for (std::size_t k = 0; k < j.size(); ++k) acc += hw.w[k] * j[k];
    return acc * jacobian_t_tau(t, tau);
  }

  // p^2 / (t dp^2) times the prefactor correction
  double jacobian_t_tau(double t, double tau) const {
    const double p = pc_.m_atom * spec_.geom.d / t;
    double f = p * p / (t * trap_.delta_p * trap_.delta_p);
    if (spec_.prefactor == Prefactor::kFallTime) {
      const double T = t + tau;
      f *= (T * T) / (tau * tau);
    }
    return f;
  }

  // Folded current J_fold(R_bar, T) = int J R_bar dPhi, in 1/(m s).
  double folded(double R_bar, double T) const {
    const double t = T * spec_.geom.d / R_bar;
    if (!(t < T)) return 0.0;
    const double tau = T - t;
    // d(t, tau)/d(R_bar, T) = t^2 / (d T)
    return density_t_tau(t, tau) * t * t / (spec_.geom.d * T);
  }

  // J(R_bar, Phi, T), atoms per m^2 per s per incident atom.
  double current_polar(double R_bar, double Phi, double T) const {
    const double t = T * spec_.geom.d / R_bar;
    if (!(t < T)) return 0.0;
    const double tau = T - t;
    std::vector<double> j;
    ring_currents(t, tau, j);
    return current_polar_from_rings(R_bar, Phi, T, j);
  }

  double current_polar_from_rings(double R_bar, double Phi, double T, const std::vector<double>& j) const {
    const double t = T * spec_.geom.d / R_bar;
    const double tau = T - t;
    const double p = pc_.m_atom * R_bar / T;
    const double dp2 = trap_.delta_p * trap_.delta_p;
    double acc = 0;
    for (std::size_t k = 0; k < j.size(); ++k) {
      const auto& r = law_.rings[k];
      const double kappa = p * r.q_perp / dp2;
      const double dq = p - r.q_perp;
      acc += r.weight * std::exp(-dq * dq / (2.0 * dp2)) * ring_azimuth_profile(r, kappa, Phi) * j[k];
    }
    const double tt = spec_.prefactor == Prefactor::kFallTime ? tau : T;
    const double m = pc_.m_atom;
    return m * m / (tt * tt) * acc / (2.0 * std::numbers::pi * dp2);
  }

  double current(double X, double Y, double T) const {
    const double R = std::hypot(X, Y);
    if (!(R > 0)) return 0.0;
    return current_polar(R, std::atan2(Y, X), T);
  }

  // Folded density on a (t, tau) grid; row-major [i_tau][i_t], 1/s^2.
  std::vector<double> density_grid(const std::vector<double>& t_axis, const std::vector<double>& tau_axis) const {
    const ScaleSet& sc = basis_.scales;
    const Eigen::Index N = spec_.n_max, Nt = static_cast<Eigen::Index>(t_axis.size());
    const Eigen::Index K = C_.rows();
    Eigen::MatrixXcd E(N, Nt);
    Eigen::MatrixXd Hk(K, Nt);
    std::vector<double> jac(t_axis.size());
    for (Eigen::Index i = 0; i < Nt; ++i) {
      const double st = t_axis[i] / sc.t_g;
      for (Eigen::Index n = 0; n < N; ++n) E(n, i) = std::polar(1.0, -basis_.lambda(static_cast<int>(n) + 1) * st);
      const HorizontalWeights hw = horizontal(t_axis[i]);
      for (Eigen::Index k = 0; k < K; ++k) Hk(k, i) = hw.w[k];
    }
    std::vector<double> out(tau_axis.size() * t_axis.size(), 0.0);
    parallel_for(tau_axis.size(), [&](std::size_t jt) {
      const double tau = tau_axis[jt];
      if (!(tau > 0)) return;
      const double s = tau / sc.t_g;
      const double Xp = -spec_.geom.H / sc.l_g + s * s;
      FresnelSums fs;
      fresnel_sums(*table_for(s, Xp), spec_.n_max, x_cut_, s, Xp, fs);
      Eigen::MatrixXcd B(N, 2 * Nt);
      for (Eigen::Index i = 0; i < Nt; ++i)
        for (Eigen::Index n = 0; n < N; ++n) {
          B(n, i) = E(n, i) * fs.F[n];
          B(n, Nt + i) = E(n, i) * fs.G[n];
        }
      const Eigen::MatrixXcd P = C_ * B;
      const double unit = sc.v_g / sc.l_g / (4.0 * std::numbers::pi * s);
      for (Eigen::Index i = 0; i < Nt; ++i) {
        double acc = 0;
        for (Eigen::Index k = 0; k < K; ++k) acc -= Hk(k, i) * std::real(std::conj(P(k, i)) * P(k, Nt + i));
        out[jt * t_axis.size() + i] = acc * unit * jacobian_t_tau(t_axis[i], tau);
      }
    });
    return out;
  }

  // Mode table fine enough for the chirp at (s, X'); the configured panel is
  // halved up to three times far from the classical arrival window.
  std::shared_ptr<const ModeTable> table_for(double s, double Xp) const {
    const double k = std::max(std::abs(Xp), std::abs(Xp - x_cut_)) / (2.0 * s) +
                     std::sqrt(basis_.lambda(spec_.n_max));
    const double need = 2.0 * std::numbers::pi / (8.0 * k);
    double panel = spec_.fresnel_panel;
    for (int level = 0; level < 3 && panel / spec_.fresnel_order > need; ++level) panel *= 0.5;
    if (panel == spec_.fresnel_panel) return table_;
    return shared_mode_table(spec_.n_max, panel, spec_.fresnel_order);
  }

 private:
  ModelSpec spec_;
  PhysicalConstants pc_;
  TrapConfig trap_;
  GQSBasis basis_;
  RecoilLaw law_full_, law_;
  TransmissionResult transmission_;
  std::vector<ModeAmplitudes> amps_;
  std::shared_ptr<const ModeTable> table_;
  double x_cut_ = 0;
  Eigen::MatrixXcd C_;
};

inline double annihilation_current(double X, double Y, double T, const CurrentModel& model) {
  return model.current(X, Y, T);
}

// ---------------------------------------------------------------------------
// Grids

// Window in (t, tau) that holds essentially all of the detected flux.
struct TimeWindow {
  double t_lo = 0, t_hi = 0, tau_lo = 0, tau_hi = 0;
  double fringe_period = 0;  // shortest beat period 2 pi t_g / lambda_nmax
};

inline TimeWindow default_window(const CurrentModel& m, double sigmas = 5.0) {
  const ScaleSet& sc = m.scales();
  const auto& spec = m.spec();
  const double mass = constants().m_atom;
  double q_lo = 1e300, q_hi = 0;
  for (const auto& r : m.law().rings) {
    q_lo = std::min(q_lo, r.q_perp);
    q_hi = std::max(q_hi, r.q_perp);
  }
  const double dv = m.trap().delta_p / mass;
  const double v_lo = std::max(q_lo / mass - sigmas * dv, 0.05 * dv + 1e-6);
  const double v_hi = q_hi / mass + sigmas * dv;
  TimeWindow w;
  w.t_lo = spec.geom.d / v_hi;
  w.t_hi = spec.geom.d / v_lo;
  const double lam = m.basis().lambda(spec.n_max);
  // vertical velocity and height at the end of the mirror, classical extremes
  // padded for diffraction
  const double vz = std::sqrt(lam + 6.0) * sc.v_g;
  const double z_top = (lam + 6.0) * sc.l_g;
  const double g = sc.g;
  const double H = spec.geom.H;
  w.tau_lo = (-vz + std::sqrt(vz * vz + 2.0 * g * H)) / g;
  w.tau_hi = (vz + std::sqrt(vz * vz + 2.0 * g * (H + z_top))) / g;
  w.fringe_period = 2.0 * std::numbers::pi * sc.t_g / lam;
  return w;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = 0.5 * (a + b);
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct CurrentMap {
  std::string coords;          // "Y,T" or "R,T" or "t,tau"
  std::string unit;            // unit of the values
  std::vector<double> axis1, axis2;
  std::vector<double> values;  // row-major [i2][i1]
  double g = 0;
  std::string config_hash;
  double integrated = 0;       // trapezoid integral of the values over the grid
  double transmitted = 0;

  double at(std::size_t i1, std::size_t i2) const { return values[i2 * axis1.size() + i1]; }
};

inline double trapezoid_2d(const std::vector<double>& a1, const std::vector<double>& a2, const std::vector<double>& v) {
  auto wts = [](const std::vector<double>& a) {
    std::vector<double> w(a.size(), 0.0);
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      const double h = 0.5 * (a[i + 1] - a[i]);
      w[i] += h;
      w[i + 1] += h;
    }
    return w;
  };
  const auto w1 = wts(a1), w2 = wts(a2);
  double acc = 0;
  for (std::size_t j = 0; j < a2.size(); ++j)
    for (std::size_t i = 0; i < a1.size(); ++i) acc += w1[i] * w2[j] * v[j * a1.size() + i];
  return acc;
}

// J(Y, T) on the X = 0 line.
inline CurrentMap current_map_yt(const CurrentModel& m, const std::vector<double>& Y, const std::vector<double>& T) {
  CurrentMap cm;
  cm.coords = "Y,T";
  cm.unit = "1/(m^2 s)";
  cm.axis1 = Y;
  cm.axis2 = T;
  cm.g = m.g();
  cm.transmitted = m.transmitted();
  cm.values.assign(Y.size() * T.size(), 0.0);
  parallel_for(Y.size() * T.size(), [&](std::size_t idx) {
    const std::size_t i = idx % Y.size(), j = idx / Y.size();
    cm.values[idx] = m.current(0.0, Y[i], T[j]);
  });
  cm.integrated = trapezoid_2d(Y, T, cm.values);
  return cm;
}

// Folded J_fold(R_bar, T).
inline CurrentMap current_map_folded(const CurrentModel& m, const std::vector<double>& R, const std::vector<double>& T) {
  CurrentMap cm;
  cm.coords = "R,T";
  cm.unit = "1/(m s)";
  cm.axis1 = R;
  cm.axis2 = T;
  cm.g = m.g();
  cm.transmitted = m.transmitted();
  cm.values.assign(R.size() * T.size(), 0.0);
  parallel_for(R.size() * T.size(), [&](std::size_t idx) {
    const std::size_t i = idx % R.size(), j = idx / R.size();
    cm.values[idx] = m.folded(R[i], T[j]);
  });
  cm.integrated = trapezoid_2d(R, T, cm.values);
  return cm;
}

// Folded density in (t, tau).
inline CurrentMap current_map_t_tau(const CurrentModel& m, const std::vector<double>& t, const std::vector<double>& tau) {
  CurrentMap cm;
  cm.coords = "t,tau";
  cm.unit = "1/s^2";
  cm.axis1 = t;
  cm.axis2 = tau;
  cm.g = m.g();
  cm.transmitted = m.transmitted();
  cm.values = m.density_grid(t, tau);
  cm.integrated = trapezoid_2d(t, tau, cm.values);
  return cm;
}

}  // namespace gbarq
