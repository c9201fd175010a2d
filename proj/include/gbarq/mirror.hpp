#pragma once
// Evolution above the mirror and the momentum distribution at its end.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gbarq/errors.hpp"
#include "gbarq/gqs.hpp"
#include "gbarq/parallel.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/source.hpp"

namespace gbarq {

struct Geometry {
  double d = 0.05;  // m, horizontal distance travelled above the mirror
  double H = 0.30;  // m, free-fall height

  void validate() const {
    if (!(d > 0) || !(H > 0)) throw DomainError("geometry: d and H must be positive");
  }
};

struct MirrorTiming {
  double t = 0;      // s
  double v_bar = 0;  // m/s
};

// t = T d / R_bar. R_bar = d is the boundary case t = T; anything shorter
// than d cannot have left the mirror.
inline MirrorTiming time_above_mirror(double R_bar, double T, const Geometry& geom) {
  if (!(R_bar > 0) || !(T > 0)) throw DomainError("time_above_mirror: R_bar and T must be positive");
  const double t = T * geom.d / R_bar;
  if (t > T) throw DomainError("time_above_mirror: event kinematically impossible (t > T)");
  return {t, R_bar / T};
}

struct EndOfDiskState {
  double t = 0;
  std::vector<ModeAmplitudes> nodes;
};

inline ModeAmplitudes evolve_to_end_of_disk(const ModeAmplitudes& a, double t, const GQSBasis& basis) {
  if (!(t >= 0)) throw DomainError("evolve_to_end_of_disk: t must be >= 0");
  ModeAmplitudes out = a;
  const double s = t / basis.scales.t_g;
  for (std::size_t n = 0; n < out.c.size(); ++n) {
    out.c[n] *= std::polar(1.0, -basis.lambda(static_cast<int>(n) + 1) * s);
  }
  return out;
}

inline EndOfDiskState evolve_to_end_of_disk(const std::vector<ModeAmplitudes>& nodes, double t, const GQSBasis& basis) {
  EndOfDiskState st;
  st.t = t;
  st.nodes.reserve(nodes.size());
  for (const auto& a : nodes) st.nodes.push_back(evolve_to_end_of_disk(a, t, basis));
  return st;
}

// chi~_n(P_i) for all modes on a fixed momentum grid (dimensionless P).
class MomentumTransform {
 public:
  MomentumTransform(const GQSBasis& basis, std::vector<double> P) : n_max_(basis.n_max), P_(std::move(P)) {
    double p_max = 0;
    for (double p : P_) p_max = std::max(p_max, std::abs(p));
    const double k = p_max + std::sqrt(basis.lambda(n_max_));
    // mean spacing at most 1/8 of the shortest wavelength
    const double spacing = 2.0 * std::numbers::pi / k / 8.0;
    const int order = 16;
    double panel = 0.5;
    while (panel / order > spacing) panel *= 0.5;
    table_ = shared_mode_table(n_max_, panel, order);
    const auto& x = table_->x();
    values_.assign(static_cast<std::size_t>(n_max_) * P_.size(), {});
    parallel_for(P_.size(), [&](std::size_t i) {
      std::vector<cplx> ph(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) ph[j] = std::polar(1.0, -P_[i] * x[j]);
      for (int n = 1; n <= n_max_; ++n) {
        const double* v = table_->values(n);
        const std::size_t len = table_->support(n);
        double re = 0, im = 0;
        for (std::size_t j = 0; j < len; ++j) {
          re += v[j] * ph[j].real();
          im += v[j] * ph[j].imag();
        }
        values_[i * n_max_ + (n - 1)] = cplx(re, im) / std::sqrt(2.0 * std::numbers::pi);
      }
    });
  }

  const std::vector<double>& P() const { return P_; }
  cplx operator()(std::size_t i, int n) const { return values_[i * n_max_ + (n - 1)]; }

  // |sum_n a_n chi~_n(P_i)|^2 in units of 1/(m v_g)
  double density(std::size_t i, const std::vector<cplx>& a) const {
    cplx acc{};
    const cplx* row = &values_[i * n_max_];
    const std::size_t n = std::min<std::size_t>(a.size(), static_cast<std::size_t>(n_max_));
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * row[k];
    return std::norm(acc);
  }

 private:
  int n_max_;
  std::vector<double> P_;
  std::shared_ptr<const ModeTable> table_;
  std::vector<cplx> values_;
};

// Vertical marginal of the end-of-mirror momentum distribution (the
// horizontal Gaussian integrates to one), on a grid of p_z [kg m/s] for each
// time t [s]. Returns row-major values [t][p] in (kg m/s)^-1.
inline std::vector<double> momentum_distribution_end(const std::vector<double>& p_z, const std::vector<double>& times,
                                                     const GQSBasis& basis, const RecoilLaw& law,
                                                     const std::vector<ModeAmplitudes>& amps) {
  const double pg = basis.scales.p_g();
  std::vector<double> P(p_z.size());
  for (std::size_t i = 0; i < p_z.size(); ++i) P[i] = p_z[i] / pg;
  const MomentumTransform mt(basis, P);
  std::vector<double> out(times.size() * p_z.size(), 0.0);
  for (std::size_t it = 0; it < times.size(); ++it) {
    std::vector<std::vector<cplx>> phased(amps.size());
    for (std::size_t k = 0; k < amps.size(); ++k) phased[k] = evolve_to_end_of_disk(amps[k], times[it], basis).c;
    parallel_for(p_z.size(), [&](std::size_t i) {
      double acc = 0;
      for (std::size_t k = 0; k < amps.size(); ++k) acc += law.rings[k].weight * mt.density(i, phased[k]);
      out[it * p_z.size() + i] = acc / pg;
    });
  }
  return out;
}

// Full distribution at one point (p_x, p_y, p_z): the ring-averaged horizontal
// Gaussian times the vertical factor, in (kg m/s)^-3.
inline double momentum_distribution_end_point(double px, double py, double p_z, double t, const GQSBasis& basis,
                                              const TrapConfig& trap, const RecoilLaw& law,
                                              const std::vector<ModeAmplitudes>& amps) {
  const double pg = basis.scales.p_g();
  const MomentumTransform mt(basis, {p_z / pg});
  const double p_perp = std::hypot(px, py);
  const double phi = std::atan2(py, px);
  const double dp2 = trap.delta_p * trap.delta_p;
  double acc = 0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const auto& r = law.rings[k];
    const double kappa = p_perp * r.q_perp / dp2;
    const double e = std::exp(-(p_perp - r.q_perp) * (p_perp - r.q_perp) / (2.0 * dp2));
    const double horiz = e * ring_azimuth_profile(r, kappa, phi) / (2.0 * std::numbers::pi * dp2);
    acc += r.weight * horiz * mt.density(0, evolve_to_end_of_disk(amps[k], t, basis).c) / pg;
  }
  return acc;
}

}  // namespace gbarq
