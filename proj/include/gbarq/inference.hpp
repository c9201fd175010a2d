#pragma once
// Event sampling, likelihood scans in g, Monte-Carlo campaigns and the
// Fisher information of the folded detector density.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gbarq/errors.hpp"
#include "gbarq/freefall.hpp"
#include "gbarq/parallel.hpp"

namespace gbarq {

// ---------------------------------------------------------------------------
// Counter-based random numbers

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream keyed by (seed, a, b); the i-th output is a pure function of the key
// and i, so substreams never overlap in practice and need no shared state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(a + 0x632be59bd9b4e019ULL) ^
                        splitmix64(b + 0x8cb92ba72f3d8dd7ULL))) {}

  std::uint64_t next() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // uniform in (0, 1)
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Best-Fisher von Mises sampler on (-pi, pi] about mu.
inline double sample_von_mises(CounterRng& rng, double mu, double kappa) {
  if (kappa < 1e-8) return mu + std::numbers::pi * (2.0 * rng.uniform() - 1.0);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0 || std::log(c / u2) + 1.0 - c >= 0) {
      const double theta = u3 > 0.5 ? std::acos(f) : -std::acos(f);
      return std::remainder(mu + theta, 2.0 * std::numbers::pi);
    }
  }
}

// ---------------------------------------------------------------------------
// Events

struct Event {
  double R = 0;    // m
  double Phi = 0;  // rad
  double T = 0;    // s
};

struct EventSet {
  std::vector<Event> events;
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;
  long long N = 0;
  long long N_c = 0;
  long long proposals = 0;          // proposals drawn in total
  long long envelope_violations = 0;
};

struct SamplerSpec {
  double points_per_period = 8.0;  // grid step = shortest fringe period / this
  double window_sigmas = 5.0;
  bool rejection = true;           // correct the gridded proposal with the exact density
  double envelope = 1.25;
  bool binomial_count = false;     // N_c ~ Binomial(N, fraction) instead of round(N fraction)
  double clip_limit = 1e-3;        // max tolerated negative mass fraction
};

struct TimeGrid {
  std::vector<double> t, tau;
};

inline TimeGrid default_time_grid(const CurrentModel& m, double points_per_period = 8.0, double sigmas = 5.0) {
  const TimeWindow w = default_window(m, sigmas);
  const double h = w.fringe_period / points_per_period;
  TimeGrid g;
  g.t = linspace(w.t_lo, w.t_hi, static_cast<std::size_t>(std::ceil((w.t_hi - w.t_lo) / h)) + 1);
  g.tau = linspace(w.tau_lo, w.tau_hi, static_cast<std::size_t>(std::ceil((w.tau_hi - w.tau_lo) / h)) + 1);
  return g;
}

// Draws events from the folded density of a model. A bilinear interpolant of
// the density on a (t, tau) grid serves as proposal (inverse CDF over cells,
// then exact inversion inside the cell); with rejection enabled each proposal
// is accepted with probability rho / (c rho_bilinear), which removes the
// discretization bias.
class EventSampler {
 public:
  EventSampler(std::shared_ptr<const CurrentModel> model, SamplerSpec spec = {}, std::optional<TimeGrid> grid = {})
      : model_(std::move(model)), spec_(spec) {
    grid_ = grid ? *grid : default_time_grid(*model_, spec.points_per_period, spec.window_sigmas);
    map_ = model_->density_grid(grid_.t, grid_.tau);
    build_cdf();
  }

  const CurrentModel& model() const { return *model_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& map() const { return map_; }
  double clipped_fraction() const { return clipped_fraction_; }
  double grid_mass() const { return total_; }

  long long count_for(long long N, std::uint64_t seed, std::uint64_t draw) const {
    const double f = model_->transmitted();
    if (!spec_.binomial_count) return std::llround(static_cast<double>(N) * f);
    CounterRng rng(seed, draw, 0xC0C0C0C0ULL);
    long long k = 0;
    for (long long i = 0; i < N; ++i) k += rng.uniform() < f ? 1 : 0;
    return k;
  }

  EventSet sample(long long N, std::uint64_t seed, std::uint64_t draw = 0) const {
    if (N < 0) throw DomainError("sample_events: N must be >= 0");
    EventSet es;
    es.seed = seed;
    es.draw = draw;
    es.N = N;
    es.N_c = count_for(N, seed, draw);
    es.events.resize(static_cast<std::size_t>(es.N_c));
    std::vector<long long> props(es.events.size()), viol(es.events.size());
    parallel_for(es.events.size(), [&](std::size_t i) {
      CounterRng rng(seed, draw, i + 1);
      es.events[i] = sample_one(rng, props[i], viol[i]);
    });
    es.proposals = std::accumulate(props.begin(), props.end(), 0LL);
    es.envelope_violations = std::accumulate(viol.begin(), viol.end(), 0LL);
    return es;
  }

 private:
  void build_cdf() {
    const std::size_t nt = grid_.t.size(), nu = grid_.tau.size();
    if (nt < 2 || nu < 2) throw DomainError("sampler: grid needs at least 2 x 2 nodes");
    double neg = 0, pos = 0;
    clipped_ = map_;
    for (double& v : clipped_) {
      if (v < 0) {
        neg -= v;
        v = 0;
      } else {
        pos += v;
      }
    }
    if (!(pos > 0)) throw DomainError("sample_events: all-zero density map");
    clipped_fraction_ = neg / pos;
    if (clipped_fraction_ > spec_.clip_limit) {
      std::ostringstream os;
      os << "sampler: negative density mass " << clipped_fraction_ << " exceeds the clip limit";
      throw NumericError(os.str());
    }
    cdf_.resize((nt - 1) * (nu - 1));
    double acc = 0;
    for (std::size_t j = 0; j + 1 < nu; ++j) {
      for (std::size_t i = 0; i + 1 < nt; ++i) {
        const double area = (grid_.t[i + 1] - grid_.t[i]) * (grid_.tau[j + 1] - grid_.tau[j]);
        acc += 0.25 * area * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1));
        cdf_[j * (nt - 1) + i] = acc;
      }
    }
    total_ = acc;
  }

  double at(std::size_t i, std::size_t j) const { return clipped_[j * grid_.t.size() + i]; }

  // inverse CDF of the density c0 (1 - a) + c1 a on [0, 1]
  static double linear_inverse(double c0, double c1, double u) {
    const double mass = 0.5 * (c0 + c1);
    if (!(mass > 0)) return u;
    const double target = u * mass;
    const double d = c1 - c0;
    if (std::abs(d) < 1e-12 * mass) return target / c0;
    // solve c0 a + d a^2 / 2 = target, stable root
    const double disc = std::max(0.0, c0 * c0 + 2.0 * d * target);
    return std::clamp(2.0 * target / (c0 + std::sqrt(disc)), 0.0, 1.0);
  }

  Event sample_one(CounterRng& rng, long long& proposals, long long& violations) const {
    const std::size_t nt = grid_.t.size();
    std::vector<double> j;
    for (;;) {
      ++proposals;
      const double u = rng.uniform() * total_;
      const std::size_t cell = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      const std::size_t c = std::min(cell, cdf_.size() - 1);
      const std::size_t i = c % (nt - 1), jj = c / (nt - 1);
      const double f00 = at(i, jj), f10 = at(i + 1, jj), f01 = at(i, jj + 1), f11 = at(i + 1, jj + 1);
      const double a = linear_inverse(f00 + f01, f10 + f11, rng.uniform());
      const double g0 = (1 - a) * f00 + a * f10, g1 = (1 - a) * f01 + a * f11;
      const double b = linear_inverse(g0, g1, rng.uniform());
      const double t = grid_.t[i] + a * (grid_.t[i + 1] - grid_.t[i]);
      const double tau = grid_.tau[jj] + b * (grid_.tau[jj + 1] - grid_.tau[jj]);
      const double bil = (1 - b) * g0 + b * g1;
      const double accept_u = rng.uniform();
      model_->ring_currents(t, tau, j);
      if (spec_.rejection) {
        const double exact = model_->density_from_rings(t, tau, j, model_->horizontal(t));
        const double env = spec_.envelope * bil;
        if (exact > env) ++violations;
        if (!(exact > 0) || accept_u * env > exact) continue;
      }
      const double T = t + tau;
      const double R = model_->spec().geom.d * T / t;
      return {R, sample_azimuth(rng, t, j), T};
    }
  }

  double sample_azimuth(CounterRng& rng, double t, const std::vector<double>& j) const {
    const auto& law = model_->law();
    const double mass = constants().m_atom;
    const double p = mass * model_->spec().geom.d / t;
    const double dp2 = model_->trap().delta_p * model_->trap().delta_p;
    const std::size_t K = j.size();
    std::vector<double> h(K), kap(K);
    double bound = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& r = law.rings[k];
      kap[k] = p * r.q_perp / dp2;
      const double dq = p - r.q_perp;
      h[k] = r.weight * std::exp(-dq * dq / (2.0 * dp2)) * j[k];
      const double env = r.fixed_azimuth ? 1.0
                                         : scaled_bessel_i(0, kap[k]) + std::abs(r.c1) * scaled_bessel_i(1, kap[k]) +
                                               std::abs(r.c2) * scaled_bessel_i(2, kap[k]);
      bound += std::abs(h[k]) * env;
    }
    if (K == 1 && law.rings[0].fixed_azimuth) return sample_von_mises(rng, law.rings[0].alpha, kap[0]);
    if (!(bound > 0)) return std::numbers::pi * (2.0 * rng.uniform() - 1.0);
    for (int tries = 0; tries < 100000; ++tries) {
      const double Phi = std::numbers::pi * (2.0 * rng.uniform() - 1.0);
      double f = 0;
      for (std::size_t k = 0; k < K; ++k) f += h[k] * ring_azimuth_profile(law.rings[k], kap[k], Phi);
      if (rng.uniform() * bound <= f) return Phi;
    }
    throw NumericError("sample_events: azimuth rejection did not terminate");
  }

  std::shared_ptr<const CurrentModel> model_;
  SamplerSpec spec_;
  TimeGrid grid_;
  std::vector<double> map_, clipped_, cdf_;
  double total_ = 0, clipped_fraction_ = 0;
};

// ---------------------------------------------------------------------------
// Likelihood

// Builds and caches models at the g values a scan asks for.
class ModelProvider {
 public:
  explicit ModelProvider(ModelSpec spec) : spec_(std::move(spec)) {}

  std::shared_ptr<const CurrentModel> at(double g) const {
    {
      std::lock_guard lk(mu_);
      auto it = cache_.find(g);
      if (it != cache_.end()) return it->second;
    }
    auto m = std::make_shared<const CurrentModel>(spec_, g);
    std::lock_guard lk(mu_);
    return cache_.emplace(g, m).first->second;
  }

  const ModelSpec& spec() const { return spec_; }
  std::size_t cached() const {
    std::lock_guard lk(mu_);
    return cache_.size();
  }

 private:
  ModelSpec spec_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const CurrentModel>> cache_;
};

enum class LikelihoodForm { kConditional, kExtended };

struct LikelihoodSpec {
  LikelihoodForm form = LikelihoodForm::kConditional;
  double floor = 1e-300;  // density floor in 1/(m s); events below it are penalized
};

struct LikelihoodValue {
  double value = 0;
  long long floored = 0;  // events that hit the floor
};

// log p_g(R_bar, T) for one event, p_g the folded density divided by the
// transmitted fraction.
inline double log_density(const Event& e, const CurrentModel& m, double floor, bool* floored = nullptr) {
  double v = m.folded(e.R, e.T) / m.transmitted();
  if (!(v > floor)) {
    if (floored) *floored = true;
    v = floor;
  }
  return std::log(v);
}

inline LikelihoodValue log_likelihood(const EventSet& es, double g, const ModelProvider& provider,
                                      const LikelihoodSpec& spec = {}) {
  const auto m = provider.at(g);
  std::vector<double> terms(es.events.size());
  std::vector<char> fl(es.events.size(), 0);
  parallel_for(es.events.size(), [&](std::size_t i) {
    bool f = false;
    terms[i] = log_density(es.events[i], *m, spec.floor, &f);
    fl[i] = f;
  });
  LikelihoodValue out;
  // fixed-order sum keeps the value independent of the worker count
  for (double t : terms) out.value += t;
  for (char f : fl) out.floored += f;
  if (spec.form == LikelihoodForm::kExtended) {
    const double frac = m->transmitted();
    out.value += static_cast<double>(es.events.size()) * std::log(frac) - static_cast<double>(es.N) * frac;
  }
  return out;
}

struct ScanSpec {
  int points = 61;
  double half_width = 3e-5;  // relative to g0
  int max_widen = 8;
  double fit_window = 2.0;   // fit points within this drop of log L
  int min_fit_points = 5;
};

struct LikelihoodScan {
  double g0 = 0;
  std::vector<double> offsets;  // (g - g0) / g0
  std::vector<double> logL;
  double g_hat = 0;
  double sigma_g = 0;
  double fit_a = 0, fit_b = 0, fit_c = 0;  // logL ~ a x^2 + b x + c in offsets
  double fit_rms = 0;
  int widened = 0;
  long long floored = 0;
};

namespace detail {

// least squares quadratic through (x, y)
inline std::array<double, 3> fit_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
  // centre and scale for conditioning
  double xm = 0;
  for (double v : x) xm += v;
  xm /= static_cast<double>(x.size());
  double xs = 0;
  for (double v : x) xs = std::max(xs, std::abs(v - xm));
  if (xs == 0) xs = 1;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = (x[i] - xm) / xs;
    A(static_cast<Eigen::Index>(i), 0) = u * u;
    A(static_cast<Eigen::Index>(i), 1) = u;
    A(static_cast<Eigen::Index>(i), 2) = 1;
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  // back to x: a (x - xm)^2 / xs^2 + b (x - xm) / xs + c
  const double a = c(0) / (xs * xs);
  const double bb = c(1) / xs - 2.0 * a * xm;
  const double cc = c(2) - c(1) * xm / xs + a * xm * xm;
  return {a, bb, cc};
}

}  // namespace detail

inline LikelihoodScan estimate_g(const EventSet& es, double g0, const ModelProvider& provider, const ScanSpec& scan = {},
                                 const LikelihoodSpec& lspec = {}) {
  if (scan.points < 5) throw DomainError("estimate_g: scan needs at least 5 points");
  double half = scan.half_width;
  for (int widen = 0; widen <= scan.max_widen; ++widen, half *= 2.0) {
    LikelihoodScan s;
    s.g0 = g0;
    s.widened = widen;
    s.offsets = linspace(-half, half, static_cast<std::size_t>(scan.points));
    s.logL.resize(s.offsets.size());
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      const auto v = log_likelihood(es, g0 * (1.0 + s.offsets[i]), provider, lspec);
      s.logL[i] = v.value;
      s.floored += v.floored;
    }
    const std::size_t best = static_cast<std::size_t>(std::max_element(s.logL.begin(), s.logL.end()) - s.logL.begin());
    if (best < 2 || best + 2 >= s.offsets.size()) continue;  // maximum on the boundary: widen
    // points near the maximum, at least min_fit_points around it
    std::vector<double> fx, fy;
    const double top = s.logL[best];
    std::size_t lo = best, hi = best;
    while (lo > 0 && top - s.logL[lo - 1] <= scan.fit_window) --lo;
    while (hi + 1 < s.logL.size() && top - s.logL[hi + 1] <= scan.fit_window) ++hi;
    while (hi - lo + 1 < static_cast<std::size_t>(scan.min_fit_points)) {
      if (lo > 0) --lo;
      if (hi - lo + 1 < static_cast<std::size_t>(scan.min_fit_points) && hi + 1 < s.logL.size()) ++hi;
    }
    for (std::size_t i = lo; i <= hi; ++i) {
      fx.push_back(s.offsets[i]);
      fy.push_back(s.logL[i]);
    }
    const auto c = detail::fit_quadratic(fx, fy);
    s.fit_a = c[0];
    s.fit_b = c[1];
    s.fit_c = c[2];
    if (!(c[0] < 0)) throw NumericError("estimate_g: likelihood not concave near its maximum");
    const double x_hat = -c[1] / (2.0 * c[0]);
    double rss = 0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      const double r = fy[i] - (c[0] * fx[i] * fx[i] + c[1] * fx[i] + c[2]);
      rss += r * r;
    }
    s.fit_rms = std::sqrt(rss / static_cast<double>(fx.size()));
    s.g_hat = g0 * (1.0 + x_hat);
    s.sigma_g = g0 / std::sqrt(-2.0 * c[0]);
    return s;
  }
  throw RangeError("estimate_g: likelihood maximum stays on the scan boundary after widening");
}

// ---------------------------------------------------------------------------
// Campaigns

struct CampaignResult {
  int M = 0;
  long long N = 0;
  std::uint64_t seed = 0;
  double g0 = 0;
  std::vector<double> g_hat;     // successful draws, in draw order
  std::vector<double> sigma_fit;
  std::vector<int> draw_index;
  int failures = 0;
  std::vector<std::string> failure_messages;
  double mean = 0, sd = 0, sd_error = 0;  // sd_error from a bootstrap
  double mean_sigma_fit = 0;
  double excess_kurtosis = 0;
  std::vector<double> hist_edges, hist_density;  // in relative offsets
};

inline void summarize_campaign(CampaignResult& r, int bins = 30, int bootstrap = 500) {
  const auto& x = r.g_hat;
  const std::size_t n = x.size();
  if (n < 2) return;
  r.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - r.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  r.sd = std::sqrt(m2 / static_cast<double>(n - 1));
  const double var_pop = m2 / static_cast<double>(n);
  r.excess_kurtosis = m4 / static_cast<double>(n) / (var_pop * var_pop) - 3.0;
  r.mean_sigma_fit = std::accumulate(r.sigma_fit.begin(), r.sigma_fit.end(), 0.0) / static_cast<double>(n);
  // bootstrap on the standard deviation
  std::vector<double> sds;
  sds.reserve(static_cast<std::size_t>(bootstrap));
  for (int b = 0; b < bootstrap; ++b) {
    CounterRng rng(r.seed, 0xB007ULL, static_cast<std::uint64_t>(b));
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n];
      s1 += v;
      s2 += v * v;
    }
    const double mu = s1 / static_cast<double>(n);
    sds.push_back(std::sqrt(std::max(0.0, (s2 - static_cast<double>(n) * mu * mu) / static_cast<double>(n - 1))));
  }
  double bm = std::accumulate(sds.begin(), sds.end(), 0.0) / static_cast<double>(sds.size());
  double bv = 0;
  for (double v : sds) bv += (v - bm) * (v - bm);
  r.sd_error = std::sqrt(bv / static_cast<double>(sds.size() - 1));
  // histogram of relative offsets over mean +- 4 sd
  const double lo = (r.mean - 4 * r.sd) / r.g0 - 1.0, hi = (r.mean + 4 * r.sd) / r.g0 - 1.0;
  r.hist_edges = linspace(lo, hi, static_cast<std::size_t>(bins) + 1);
  r.hist_density.assign(static_cast<std::size_t>(bins), 0.0);
  const double w = (hi - lo) / bins;
  std::size_t inside = 0;
  for (double v : x) {
    const double o = v / r.g0 - 1.0;
    const auto k = static_cast<long long>(std::floor((o - lo) / w));
    if (k >= 0 && k < bins) {
      r.hist_density[static_cast<std::size_t>(k)] += 1.0;
      ++inside;
    }
  }
  // normalized over the events that fall inside the histogram range
  if (inside > 0)
    for (double& d : r.hist_density) d /= static_cast<double>(inside) * w;
}

inline CampaignResult run_campaign(int M, long long N, std::uint64_t seed, const EventSampler& sampler,
                                   const ModelProvider& provider, const ScanSpec& scan = {},
                                   const LikelihoodSpec& lspec = {}) {
  if (M < 1) throw DomainError("run_campaign: M must be >= 1");
  CampaignResult r;
  r.M = M;
  r.N = N;
  r.seed = seed;
  r.g0 = sampler.model().g();
  struct Slot {
    bool ok = false;
    double g = 0, s = 0;
    std::string err;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(M));
  // draws run one after another; parallelism lives inside each draw
  for (int d = 0; d < M; ++d) {
    auto& sl = slots[static_cast<std::size_t>(d)];
    try {
      const EventSet es = sampler.sample(N, seed, static_cast<std::uint64_t>(d) + 1);
      const LikelihoodScan sc = estimate_g(es, r.g0, provider, scan, lspec);
      sl.ok = true;
      sl.g = sc.g_hat;
      sl.s = sc.sigma_g;
    } catch (const std::exception& e) {
      sl.err = "draw " + std::to_string(d) + ": " + e.what();
    }
  }
  for (int d = 0; d < M; ++d) {
    const auto& sl = slots[static_cast<std::size_t>(d)];
    if (sl.ok) {
      r.g_hat.push_back(sl.g);
      r.sigma_fit.push_back(sl.s);
      r.draw_index.push_back(d);
    } else {
      ++r.failures;
      r.failure_messages.push_back(sl.err);
    }
  }
  summarize_campaign(r);
  return r;
}

// ---------------------------------------------------------------------------
// Fisher information

struct FisherSpec {
  // central differences; with two steps in ratio 2 the result is Richardson
  // extrapolated, which removes the O(step^2) truncation
  std::vector<double> rel_steps{5e-5, 2.5e-5};
  bool richardson = true;
  double floor_rel = 1e-12;  // density floor relative to the map maximum
  double points_per_period = 8.0;
  double window_sigmas = 5.0;
};

struct FisherResult {
  double g0 = 0;
  long long N = 0;
  double I_g = 0;               // per incident atom, s^4/m^2
  std::vector<double> I_steps;  // one per finite-difference step
  double I_conditional = 0;     // per detected atom, from the normalized density
  double fraction = 0;
  double d_fraction_dg = 0;
  double sigma_CR = 0;          // m/s^2
  double step_spread = 0;       // max relative difference between steps
  long long clipped_nodes = 0;  // nodes below the floor where the derivative mattered
  double negative_mass = 0;
  std::size_t grid_nodes = 0;

  double efficiency(double sigma_mc) const { return (sigma_CR / sigma_mc) * (sigma_CR / sigma_mc); }
};

inline FisherResult fisher_information(const ModelSpec& spec, double g0, long long N, const FisherSpec& fs = {},
                                       const ModelProvider* provider = nullptr,
                                       std::optional<TimeGrid> grid = {}) {
  if (fs.rel_steps.empty()) throw DomainError("fisher_information: need at least one step");
  auto model_at = [&](double g) {
    return provider ? provider->at(g) : std::make_shared<const CurrentModel>(spec, g);
  };
  const auto m0 = model_at(g0);
  const TimeGrid tg = grid ? *grid : default_time_grid(*m0, fs.points_per_period, fs.window_sigmas);
  const std::vector<double> rho0 = m0->density_grid(tg.t, tg.tau);
  const std::size_t nt = tg.t.size();
  auto wts = [](const std::vector<double>& a) {
    std::vector<double> w(a.size(), 0.0);
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      const double h = 0.5 * (a[i + 1] - a[i]);
      w[i] += h;
      w[i + 1] += h;
    }
    return w;
  };
  const auto wt = wts(tg.t), wu = wts(tg.tau);
  double mx = 0, neg = 0, pos = 0;
  for (double v : rho0) {
    mx = std::max(mx, v);
    (v < 0 ? neg : pos) += std::abs(v);
  }
  FisherResult r;
  r.g0 = g0;
  r.N = N;
  r.fraction = m0->transmitted();
  r.negative_mass = pos > 0 ? neg / pos : 0;
  r.grid_nodes = rho0.size();
  const double floor = fs.floor_rel * mx;
  for (std::size_t si = 0; si < fs.rel_steps.size(); ++si) {
    const double dg = fs.rel_steps[si] * g0;
    const auto mp = model_at(g0 + dg), mm = model_at(g0 - dg);
    const auto rp = mp->density_grid(tg.t, tg.tau), rm = mm->density_grid(tg.t, tg.tau);
    double dmax = 0;
    for (std::size_t k = 0; k < rho0.size(); ++k) dmax = std::max(dmax, std::abs(rp[k] - rm[k]));
    double I = 0, Ic = 0;
    const double fp = mp->transmitted(), fm = mm->transmitted();
    long long clipped = 0;
    for (std::size_t k = 0; k < rho0.size(); ++k) {
      const double d = (rp[k] - rm[k]) / (2.0 * dg);
      const double w = wt[k % nt] * wu[k / nt];
      if (!(rho0[k] > floor)) {
        if (std::abs(rp[k] - rm[k]) > 1e-6 * dmax) ++clipped;
        continue;
      }
      I += w * d * d / rho0[k];
      const double dc = (rp[k] / fp - rm[k] / fm) / (2.0 * dg);
      Ic += w * dc * dc / (rho0[k] / r.fraction);
    }
    r.I_steps.push_back(I);
    if (si == 0) {
      r.I_g = I;
      r.I_conditional = Ic;
      r.d_fraction_dg = (fp - fm) / (2.0 * dg);
      r.clipped_nodes = clipped;
    }
  }
  for (double v : r.I_steps) r.step_spread = std::max(r.step_spread, std::abs(v - r.I_g) / r.I_g);
  if (fs.richardson && fs.rel_steps.size() >= 2 && std::abs(fs.rel_steps[0] / fs.rel_steps[1] - 2.0) < 1e-12) {
    r.I_g = (4.0 * r.I_steps[1] - r.I_steps[0]) / 3.0;
    r.I_conditional *= r.I_g / r.I_steps[0];
  }
  r.sigma_CR = N > 0 ? 1.0 / std::sqrt(static_cast<double>(N) * r.I_g) : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace gbarq
