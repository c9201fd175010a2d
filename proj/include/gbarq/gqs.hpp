#pragma once
// Gravitational quantum state basis, overlap of the released wavepacket on it,
// and the fraction of atoms passing the mirror/absorber slit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>
#include <vector>

#include "gbarq/airy.hpp"
#include "gbarq/errors.hpp"
#include "gbarq/parallel.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/quadrature.hpp"
#include "gbarq/source.hpp"

namespace gbarq {

using cplx = std::complex<double>;

// Zero tables are g-independent; memoized per n_max.
inline std::shared_ptr<const AiryZeroTable> shared_zero_table(int n_max) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const AiryZeroTable>> cache;
  std::lock_guard lk(mu);
  auto it = cache.find(n_max);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const AiryZeroTable>(airy_zeros(n_max));
  cache.emplace(n_max, t);
  return t;
}

// Absorber height when none is configured, in units of l_g.
inline double default_absorber_dimless(double lambda_nmax) { return lambda_nmax + 10.0; }

struct GQSBasis {
  int n_max = 0;
  std::shared_ptr<const AiryZeroTable> zeros;
  ScaleSet scales;
  double z_max = 0;  // m

  double lambda(int n) const { return zeros->lambda(n); }
  GQSMode mode_at(int n) const { return mode(*zeros, n); }
};

// z_max <= 0 selects the default (lambda_nmax + 10) l_g.
inline GQSBasis build_basis(int n_max, const ScaleSet& scales, double z_max = 0) {
  if (n_max < 1) throw DomainError("build_basis: n_max must be >= 1");
  GQSBasis b;
  b.n_max = n_max;
  b.zeros = shared_zero_table(n_max);
  b.scales = scales;
  const double lam_max = b.zeros->lambda(n_max);
  b.z_max = z_max > 0 ? z_max : default_absorber_dimless(lam_max) * scales.l_g;
  if (b.z_max < lam_max * scales.l_g) {
    throw DomainError("build_basis: z_max below the turning point of mode n_max");
  }
  return b;
}

struct ModeAmplitudes {
  double q_z = 0;        // kg m/s
  std::vector<cplx> c;   // c_n at index n-1

  double norm2() const {
    double s = 0;
    for (const auto& v : c) s += std::norm(v);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Overlaps

struct OverlapRuleSpec {
  double sigmas = 8.0;     // half-width of the window in units of zeta
  int order = 16;          // nodes per panel
  double per_wavelength = 8.0;
};

// Precomputes phi_n(x_j) w_j g(x_j) on the Gaussian window so that c_n for
// any vertical recoil Q is one complex matrix-vector product.
class OverlapEngine {
 public:
  OverlapEngine(const GQSBasis& basis, const TrapConfig& trap, double q_z_max, OverlapRuleSpec spec = {})
      : n_max_(basis.n_max), scales_(basis.scales) {
    const double l = scales_.l_g;
    h_ = trap.h / l;
    zeta_ = trap.zeta / l;
    if (!(h_ > 0) || !(zeta_ > 0)) throw DomainError("overlap: h and zeta must be positive");
    const double a = std::max(0.0, h_ - spec.sigmas * zeta_);
    const double b = h_ + spec.sigmas * zeta_;
    const double q_max = std::abs(q_z_max) / scales_.p_g();
    const double k_max = q_max + std::sqrt(basis.lambda(n_max_)) + 4.0 / zeta_;
    const double spacing = 2.0 * std::numbers::pi / k_max / spec.per_wavelength;
    rule_ = panel_gauss_legendre(a, b, spacing * spec.order, spec.order);
    q_max_ = q_max;

    const std::size_t J = rule_.size();
    gauss_.resize(J);
    const double amp = std::pow(2.0 * std::numbers::pi * zeta_ * zeta_, -0.25);
    double norm_rule = 0;
    for (std::size_t j = 0; j < J; ++j) {
      const double d = rule_.nodes[j] - h_;
      gauss_[j] = amp * std::exp(-d * d / (4.0 * zeta_ * zeta_));
      norm_rule += rule_.weights[j] * gauss_[j] * gauss_[j];
    }
    // the exact mass of |psi0|^2 on [a, b] and on [0, inf)
    const double s2 = std::sqrt(2.0) * zeta_;
    const double exact = 0.5 * (std::erf((b - h_) / s2) - std::erf((a - h_) / s2));
    half_line_mass_ = 0.5 * std::erfc(-h_ / s2);
    if (std::abs(norm_rule - exact) > 1e-11) {
      std::ostringstream os;
      os << "overlap quadrature failed on the Gaussian norm: rule " << norm_rule << " vs exact " << exact
         << " (" << J << " nodes on [" << a << ", " << b << "])";
      throw NumericError(os.str());
    }
    table_.resize(static_cast<std::size_t>(n_max_) * J);
    parallel_for(static_cast<std::size_t>(n_max_), [&](std::size_t n) {
      const GQSMode md = basis.mode_at(static_cast<int>(n) + 1);
      for (std::size_t j = 0; j < J; ++j) {
        table_[n * J + j] = eigenfunction_dimless(md, rule_.nodes[j]) * rule_.weights[j] * gauss_[j];
      }
    });
  }

  // c_n for the vertical Gaussian with momentum q_z (SI)
  ModeAmplitudes amplitudes(double q_z) const {
    const double Q = q_z / scales_.p_g();
    if (std::abs(Q) > q_max_ * (1 + 1e-12) + 1e-300) {
      throw DomainError("overlap: q_z beyond the momentum the rule was built for");
    }
    const std::size_t J = rule_.size();
    std::vector<cplx> phase(J);
    for (std::size_t j = 0; j < J; ++j) phase[j] = std::polar(1.0, Q * (rule_.nodes[j] - h_));
    ModeAmplitudes out;
    out.q_z = q_z;
    out.c.resize(static_cast<std::size_t>(n_max_));
    for (int n = 0; n < n_max_; ++n) {
      const double* row = &table_[static_cast<std::size_t>(n) * J];
      double re = 0, im = 0;
      for (std::size_t j = 0; j < J; ++j) {
        re += row[j] * phase[j].real();
        im += row[j] * phase[j].imag();
      }
      out.c[static_cast<std::size_t>(n)] = {re, im};
    }
    const double s = out.norm2();
    if (s > half_line_mass_ + 1e-9) {
      std::ostringstream os;
      os << "overlap quadrature violates the Bessel bound: sum |c_n|^2 = " << s << " > " << half_line_mass_;
      throw NumericError(os.str());
    }
    return out;
  }

  double half_line_mass() const { return half_line_mass_; }
  std::size_t nodes() const { return rule_.size(); }

 private:
  int n_max_;
  ScaleSet scales_;
  double h_ = 0, zeta_ = 0, q_max_ = 0, half_line_mass_ = 0;
  QuadratureRule rule_;
  std::vector<double> gauss_;
  std::vector<double> table_;
};

inline ModeAmplitudes overlap_coefficients(const InitialState& psi0, const GQSBasis& basis) {
  TrapConfig trap;
  trap.h = psi0.h;
  trap.zeta = psi0.zeta;
  trap.delta_p = psi0.delta_p;
  return OverlapEngine(basis, trap, psi0.q_z).amplitudes(psi0.q_z);
}

// Amplitudes for every ring of a recoil law.
inline std::vector<ModeAmplitudes> ring_amplitudes(const GQSBasis& basis, const TrapConfig& trap, const RecoilLaw& law) {
  double q_max = 0;
  for (const auto& r : law.rings) q_max = std::max(q_max, std::abs(r.q_z));
  const OverlapEngine eng(basis, trap, q_max);
  std::vector<ModeAmplitudes> out(law.rings.size());
  parallel_for(law.rings.size(), [&](std::size_t k) { out[k] = eng.amplitudes(law.rings[k].q_z); });
  return out;
}

struct TransmissionResult {
  double fraction = 0;
  long long n_c = 0;
  std::vector<double> per_ring;  // sum_n |c_n|^2 for each ring
};

inline TransmissionResult transmitted_fraction(const std::vector<ModeAmplitudes>& amps, const RecoilLaw& law, long long N) {
  TransmissionResult r;
  r.per_ring.resize(amps.size());
  for (std::size_t k = 0; k < amps.size(); ++k) {
    r.per_ring[k] = amps[k].norm2();
    r.fraction += law.rings[k].weight * r.per_ring[k];
  }
  r.n_c = std::llround(static_cast<double>(N) * r.fraction);
  return r;
}

// n_max = 0 retains nothing.
inline TransmissionResult transmitted_fraction(const TrapConfig& trap, const RecoilLaw& law, int n_max,
                                               const ScaleSet& scales, long long N) {
  if (n_max == 0) {
    TransmissionResult r;
    r.per_ring.assign(law.rings.size(), 0.0);
    return r;
  }
  const GQSBasis basis = build_basis(n_max, scales);
  return transmitted_fraction(ring_amplitudes(basis, trap, law), law, N);
}

// ---------------------------------------------------------------------------
// Eigenfunctions sampled on a shared grid (g-independent, in units of l_g).
// values hold phi_n(x_j) w_j for x_j below lambda_n + 15.

class ModeTable {
 public:
  ModeTable(std::shared_ptr<const AiryZeroTable> zeros, int n_max, double panel_width = 0.5, int order = 16)
      : n_max_(n_max), panel_width_(panel_width), order_(order), zeros_(std::move(zeros)) {
    if (n_max < 1 || n_max > static_cast<int>(zeros_->size())) throw DomainError("ModeTable: bad n_max");
    const double x_top = zeros_->lambda(n_max) + kModeSupportMargin;
    const QuadratureRule r = panel_gauss_legendre(0.0, x_top, panel_width, order);
    x_ = r.nodes;
    w_ = r.weights;
    offset_.resize(n_max + 1);
    len_.resize(n_max);
    std::size_t total = 0;
    for (int n = 1; n <= n_max; ++n) {
      const double top = zeros_->lambda(n) + kModeSupportMargin;
      len_[n - 1] = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), top) - x_.begin());
      offset_[n - 1] = total;
      total += len_[n - 1];
    }
    offset_[n_max] = total;
    values_.resize(total);
    parallel_for(static_cast<std::size_t>(n_max), [&](std::size_t k) {
      const GQSMode md = mode(*zeros_, static_cast<int>(k) + 1);
      double* out = &values_[offset_[k]];
      for (std::size_t j = 0; j < len_[k]; ++j) out[j] = eigenfunction_dimless(md, x_[j]) * w_[j];
    });
  }

  int n_max() const { return n_max_; }
  double panel_width() const { return panel_width_; }
  int order() const { return order_; }
  double mean_spacing() const { return panel_width_ / order_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& w() const { return w_; }
  const double* values(int n) const { return &values_[offset_[n - 1]]; }
  std::size_t support(int n) const { return len_[n - 1]; }
  // number of nodes of mode n below x_cut
  std::size_t support(int n, double x_cut) const {
    const auto cut = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x_cut) - x_.begin());
    return std::min(len_[n - 1], cut);
  }
  const AiryZeroTable& zeros() const { return *zeros_; }

 private:
  int n_max_;
  double panel_width_;
  int order_;
  std::shared_ptr<const AiryZeroTable> zeros_;
  std::vector<double> x_, w_;
  std::vector<std::size_t> offset_, len_;
  std::vector<double> values_;
};

inline std::shared_ptr<const ModeTable> shared_mode_table(int n_max, double panel_width = 0.5, int order = 16) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, std::shared_ptr<const ModeTable>> cache;
  const auto key = std::make_tuple(n_max, panel_width, order);
  {
    std::lock_guard lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const ModeTable>(shared_zero_table(n_max), n_max, panel_width, order);
  std::lock_guard lk(mu);
  return cache.emplace(key, t).first->second;
}

}  // namespace gbarq
