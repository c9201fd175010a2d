#pragma once
// Run configuration: flat `section.key = value unit` text, validated against a
// fixed key table. Physical values are stored in SI; the canonical form lists
// every key in table order with SI units and 17 significant digits, and the
// config hash is FNV-1a over that text.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gbarq/errors.hpp"
#include "gbarq/freefall.hpp"
#include "gbarq/inference.hpp"
#include "gbarq/physcore.hpp"

namespace gbarq {

enum class Dim { kNone, kLength, kTime, kEnergy, kFrequency, kVelocity, kAcceleration, kAngle };

enum class ValueType { kReal, kInt, kBool, kText, kVector };

using ConfigValue = std::variant<double, long long, bool, std::string, std::vector<double>>;

struct KeySpec {
  std::string key;
  ValueType type;
  Dim dim;
  ConfigValue def;
  // returns an error message, empty when valid
  std::function<std::string(const ConfigValue&)> check;
  std::string doc;
};

namespace cfg {

inline std::string positive(const ConfigValue& v) {
  if (auto d = std::get_if<double>(&v)) return *d > 0 && std::isfinite(*d) ? "" : "must be positive";
  if (auto i = std::get_if<long long>(&v)) return *i > 0 ? "" : "must be positive";
  return "";
}
inline std::string non_negative(const ConfigValue& v) {
  if (auto d = std::get_if<double>(&v)) return *d >= 0 && std::isfinite(*d) ? "" : "must be >= 0";
  if (auto i = std::get_if<long long>(&v)) return *i >= 0 ? "" : "must be >= 0";
  return "";
}
inline std::function<std::string(const ConfigValue&)> one_of(std::vector<std::string> options) {
  return [options](const ConfigValue& v) {
    const auto& s = std::get<std::string>(v);
    for (const auto& o : options)
      if (o == s) return std::string();
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}
inline std::string any(const ConfigValue&) { return ""; }
inline std::string nonzero_vector(const ConfigValue& v) {
  const auto& x = std::get<std::vector<double>>(v);
  double s = 0;
  for (double c : x) s += c * c;
  return x.size() == 3 && s > 0 ? "" : "must be a non-zero 3-vector";
}
inline std::string positive_list(const ConfigValue& v) {
  const auto& x = std::get<std::vector<double>>(v);
  if (x.empty()) return "must not be empty";
  for (double c : x)
    if (!(c > 0)) return "entries must be positive";
  return "";
}

// SI value = v / div * mul; dividing by an exact power of ten rounds the same
// way as the decimal literal, so "5 cm" and "0.05 m" hash alike
struct UnitDef {
  std::string_view name;
  Dim dim;
  double mul;
  double div = 1.0;
};

inline const std::vector<UnitDef>& units() {
  constexpr double eV = 1.602176634e-19;
  static const std::vector<UnitDef> u = {
      {"m", Dim::kLength, 1.0},          {"cm", Dim::kLength, 1.0, 1e2},    {"mm", Dim::kLength, 1.0, 1e3},
      {"um", Dim::kLength, 1.0, 1e6},    {"nm", Dim::kLength, 1.0, 1e9},    {"s", Dim::kTime, 1.0},
      {"ms", Dim::kTime, 1.0, 1e3},      {"us", Dim::kTime, 1.0, 1e6},      {"ns", Dim::kTime, 1.0, 1e9},
      {"J", Dim::kEnergy, 1.0},          {"eV", Dim::kEnergy, eV},          {"meV", Dim::kEnergy, eV, 1e3},
      {"ueV", Dim::kEnergy, eV, 1e6},    {"neV", Dim::kEnergy, eV, 1e9},    {"peV", Dim::kEnergy, eV, 1e12},
      {"Hz", Dim::kFrequency, 1.0},      {"kHz", Dim::kFrequency, 1e3},     {"MHz", Dim::kFrequency, 1e6},
      {"m/s", Dim::kVelocity, 1.0},      {"cm/s", Dim::kVelocity, 1.0, 1e2}, {"mm/s", Dim::kVelocity, 1.0, 1e3},
      {"m/s2", Dim::kAcceleration, 1.0}, {"m/s^2", Dim::kAcceleration, 1.0},
      {"rad", Dim::kAngle, 1.0},         {"deg", Dim::kAngle, std::numbers::pi, 180.0},
  };
  return u;
}

inline std::string_view si_unit(Dim d) {
  switch (d) {
    case Dim::kLength: return "m";
    case Dim::kTime: return "s";
    case Dim::kEnergy: return "J";
    case Dim::kFrequency: return "Hz";
    case Dim::kVelocity: return "m/s";
    case Dim::kAcceleration: return "m/s2";
    case Dim::kAngle: return "rad";
    case Dim::kNone: return "";
  }
  return "";
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace cfg

inline const std::vector<KeySpec>& config_keys() {
  using cfg::any;
  using cfg::non_negative;
  using cfg::one_of;
  using cfg::positive;
  const double eV = 1.602176634e-19;
  static const std::vector<KeySpec> keys = {
      {"physics.g0", ValueType::kReal, Dim::kAcceleration, 9.81, positive, "acceleration the events are drawn at"},
      {"trap.f", ValueType::kReal, Dim::kFrequency, 20e3, positive, "ion trap frequency"},
      {"trap.h", ValueType::kReal, Dim::kLength, 10e-6, positive, "release height above the mirror"},
      {"photodetach.delta_E", ValueType::kReal, Dim::kEnergy, 10e-6 * eV, non_negative, "excess energy"},
      {"photodetach.pol_axis", ValueType::kVector, Dim::kNone, std::vector<double>{0, 1, 0}, cfg::nonzero_vector,
       "laser polarization axis"},
      {"recoil.mode", ValueType::kText, Dim::kNone, std::string("dipole"), one_of({"dipole", "kick"}),
       "dipole: photo-detachment recoil; kick: fixed horizontal velocity"},
      {"recoil.kick_v", ValueType::kReal, Dim::kVelocity, 1.02, non_negative, "kick speed for recoil.mode = kick"},
      {"recoil.kick_azimuth", ValueType::kReal, Dim::kAngle, std::numbers::pi / 2, any, "kick direction"},
      {"recoil.ring_panel", ValueType::kReal, Dim::kNone, 0.05, positive, "panel width in u = cos(polar angle)"},
      {"recoil.ring_nodes", ValueType::kInt, Dim::kNone, 8LL, positive, "Gauss-Legendre nodes per panel"},
      {"recoil.polar_order", ValueType::kInt, Dim::kNone, 48LL, positive, "product rule, polar nodes"},
      {"recoil.azimuth_order", ValueType::kInt, Dim::kNone, 64LL, positive, "product rule, azimuth nodes"},
      {"geometry.d", ValueType::kReal, Dim::kLength, 0.05, positive, "distance travelled above the mirror"},
      {"geometry.H", ValueType::kReal, Dim::kLength, 0.30, positive, "free-fall height"},
      {"geometry.n_max", ValueType::kInt, Dim::kNone, 1000LL, positive, "highest retained state"},
      {"geometry.z_max", ValueType::kReal, Dim::kLength, 0.0, non_negative, "absorber height, 0 = automatic"},
      {"atoms.N", ValueType::kInt, Dim::kNone, 1000LL, non_negative, "incident atoms per draw"},
      {"numerics.fresnel_panel", ValueType::kReal, Dim::kNone, 0.5, positive, "panel width in l_g"},
      {"numerics.fresnel_order", ValueType::kInt, Dim::kNone, 16LL, positive, "nodes per panel"},
      {"numerics.prefactor", ValueType::kText, Dim::kNone, std::string("T"), one_of({"T", "tau"}),
       "current prefactor m^2/T^2 or m^2/tau^2"},
      {"numerics.points_per_period", ValueType::kReal, Dim::kNone, 8.0, positive, "time grid points per fringe"},
      {"numerics.window_sigmas", ValueType::kReal, Dim::kNone, 5.0, positive, "horizontal window in velocity widths"},
      {"numerics.ring_prune", ValueType::kReal, Dim::kNone, 1e-14, non_negative, "drop rings carrying less"},
      {"grid.kind", ValueType::kText, Dim::kNone, std::string("yt"), one_of({"yt", "folded", "t-tau"}),
       "current-map coordinates"},
      {"grid.Y_min", ValueType::kReal, Dim::kLength, 0.282, positive, ""},
      {"grid.Y_max", ValueType::kReal, Dim::kLength, 0.322, positive, ""},
      {"grid.Y_points", ValueType::kInt, Dim::kNone, 80LL, positive, ""},
      {"grid.T_min", ValueType::kReal, Dim::kTime, 0.276, positive, ""},
      {"grid.T_max", ValueType::kReal, Dim::kTime, 0.316, positive, ""},
      {"grid.T_points", ValueType::kInt, Dim::kNone, 80LL, positive, ""},
      {"sourcedist.v_max", ValueType::kReal, Dim::kVelocity, 1.5, positive, "half-width of the (v_y, v_z) grid"},
      {"sourcedist.points", ValueType::kInt, Dim::kNone, 121LL, positive, ""},
      {"endmirror.v_max", ValueType::kReal, Dim::kVelocity, 0.2, positive, "half-width of the v_z axis"},
      {"endmirror.v_points", ValueType::kInt, Dim::kNone, 201LL, positive, ""},
      {"endmirror.t_min", ValueType::kReal, Dim::kTime, 0.0, non_negative, ""},
      {"endmirror.t_max", ValueType::kReal, Dim::kTime, 0.1, positive, ""},
      {"endmirror.t_points", ValueType::kInt, Dim::kNone, 101LL, positive, ""},
      {"sampler.rejection", ValueType::kBool, Dim::kNone, true, any, "exact-density rejection step"},
      {"sampler.envelope", ValueType::kReal, Dim::kNone, 1.25, positive, ""},
      {"sampler.binomial", ValueType::kBool, Dim::kNone, false, any, "binomial detected count"},
      {"scan.points", ValueType::kInt, Dim::kNone, 61LL, positive, ""},
      {"scan.half_width", ValueType::kReal, Dim::kNone, 3e-5, positive, "relative to g0"},
      {"scan.max_widen", ValueType::kInt, Dim::kNone, 8LL, non_negative, ""},
      {"scan.fit_window", ValueType::kReal, Dim::kNone, 2.0, positive, "log-likelihood drop kept in the fit"},
      {"likelihood.form", ValueType::kText, Dim::kNone, std::string("conditional"),
       one_of({"conditional", "extended"}), ""},
      {"likelihood.floor", ValueType::kReal, Dim::kNone, 1e-300, positive, "density floor, 1/(m s)"},
      {"estimate.events", ValueType::kText, Dim::kNone, std::string(""), any, "event file; empty = simulate"},
      {"campaign.M", ValueType::kInt, Dim::kNone, 200LL, positive, "repetitions"},
      {"campaign.fisher", ValueType::kBool, Dim::kNone, true, any, "also compute the Cramer-Rao bound"},
      {"fisher.steps", ValueType::kVector, Dim::kNone, std::vector<double>{5e-5, 2.5e-5}, cfg::positive_list,
       "relative finite-difference steps"},
      {"run.seed", ValueType::kInt, Dim::kNone, 1LL, non_negative, ""},
      {"run.workers", ValueType::kInt, Dim::kNone, 1LL, non_negative, "0 = all cores"},
      {"run.out", ValueType::kText, Dim::kNone, std::string("out"), any, "output directory"},
  };
  return keys;
}

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

class RunConfig {
 public:
  RunConfig() {
    for (const auto& k : config_keys()) values_[k.key] = k.def;
  }

  double real(const std::string& k) const { return std::get<double>(get(k)); }
  long long integer(const std::string& k) const { return std::get<long long>(get(k)); }
  bool flag(const std::string& k) const { return std::get<bool>(get(k)); }
  const std::string& text(const std::string& k) const { return std::get<std::string>(get(k)); }
  const std::vector<double>& vec(const std::string& k) const { return std::get<std::vector<double>>(get(k)); }

  const ConfigValue& get(const std::string& k) const {
    auto it = values_.find(k);
    if (it == values_.end()) throw DomainError("config: unknown key " + k);
    return it->second;
  }

  // Parses and stores `value` (with unit suffix where required).
  void set(const std::string& key, const std::string& value, int line = 0) {
    const KeySpec* ks = find_key(key);
    if (!ks) throw ParseError(key, line, "unknown key");
    ConfigValue v = parse_value(*ks, value, line);
    const std::string err = ks->check(v);
    if (!err.empty()) throw ParseError(key, line, err);
    values_[key] = std::move(v);
  }

  void validate() const {
    if (real("grid.Y_max") <= real("grid.Y_min")) throw ParseError("grid.Y_max", 0, "must exceed grid.Y_min");
    if (real("grid.T_max") <= real("grid.T_min")) throw ParseError("grid.T_max", 0, "must exceed grid.T_min");
    if (real("endmirror.t_max") < real("endmirror.t_min"))
      throw ParseError("endmirror.t_max", 0, "must not be below endmirror.t_min");
    if (integer("geometry.n_max") > 5000) throw ParseError("geometry.n_max", 0, "must be <= 5000");
    if (integer("scan.points") < 5) throw ParseError("scan.points", 0, "must be >= 5");
    if (integer("recoil.polar_order") < 2) throw ParseError("recoil.polar_order", 0, "must be >= 2");
    if (integer("recoil.azimuth_order") < 4) throw ParseError("recoil.azimuth_order", 0, "must be >= 4");
    if (integer("recoil.ring_nodes") < 2) throw ParseError("recoil.ring_nodes", 0, "must be >= 2");
  }

  // run.* keys (seed, workers, output directory) do not change the physics
  // and are left out of the hashed form
  std::string canonical(bool physics_only = false) const {
    std::ostringstream os;
    for (const auto& k : config_keys()) {
      if (physics_only && k.key.starts_with("run.")) continue;
      const auto& v = values_.at(k.key);
      os << k.key << " = " << format_value(k, v) << '\n';
    }
    return os.str();
  }

  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical(true)) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  static std::string format_value(const KeySpec& k, const ConfigValue& v) {
    switch (k.type) {
      case ValueType::kReal: {
        std::string s = cfg::fmt17(std::get<double>(v));
        if (k.dim != Dim::kNone) s += " " + std::string(cfg::si_unit(k.dim));
        return s;
      }
      case ValueType::kInt: return std::to_string(std::get<long long>(v));
      case ValueType::kBool: return std::get<bool>(v) ? "true" : "false";
      case ValueType::kText: return std::get<std::string>(v);
      case ValueType::kVector: {
        std::string s;
        for (double c : std::get<std::vector<double>>(v)) s += (s.empty() ? "" : " ") + cfg::fmt17(c);
        return s;
      }
    }
    return "";
  }

 private:
  static ConfigValue parse_value(const KeySpec& ks, const std::string& raw, int line) {
    const std::string s = cfg::trim(raw);
    auto fail = [&](const std::string& why) { return ParseError(ks.key, line, why); };
    switch (ks.type) {
      case ValueType::kText: return s;
      case ValueType::kBool:
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw fail("expected true or false");
      case ValueType::kInt: {
        std::size_t pos = 0;
        long long v = 0;
        try {
          v = std::stoll(s, &pos);
        } catch (...) {
          throw fail("expected an integer");
        }
        if (cfg::trim(s.substr(pos)) != "") throw fail("unexpected trailing text");
        return v;
      }
      case ValueType::kVector: {
        std::istringstream is(s);
        std::vector<double> out;
        std::string tok;
        while (is >> tok) {
          std::size_t pos = 0;
          try {
            out.push_back(std::stod(tok, &pos));
          } catch (...) {
            throw fail("expected numbers");
          }
          if (pos != tok.size()) throw fail("expected numbers");
        }
        return out;
      }
      case ValueType::kReal: {
        std::size_t pos = 0;
        double v = 0;
        try {
          v = std::stod(s, &pos);
        } catch (...) {
          throw fail("expected a number");
        }
        const std::string unit = cfg::trim(s.substr(pos));
        if (ks.dim == Dim::kNone) {
          if (!unit.empty()) throw fail("dimensionless key takes no unit");
          return v;
        }
        if (unit.empty()) throw fail("missing unit suffix (expected " + std::string(cfg::si_unit(ks.dim)) + " or a multiple)");
        for (const auto& u : cfg::units()) {
          if (u.name == unit) {
            if (u.dim != ks.dim) throw fail("unit " + unit + " has the wrong dimension");
            return v / u.div * u.mul;
          }
        }
        throw fail("unknown unit " + unit);
      }
    }
    throw fail("unsupported value");
  }

  std::map<std::string, ConfigValue> values_;
};

// Reads `section.key = value` lines; `#` starts a comment.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = cfg::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("", no, "expected key = value");
    c.set(cfg::trim(t.substr(0, eq)), t.substr(eq + 1), no);
  }
  c.validate();
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Views onto the library types

inline ModelSpec model_spec(const RunConfig& c) {
  ModelSpec s;
  s.f = c.real("trap.f");
  s.h = c.real("trap.h");
  s.delta_E = c.real("photodetach.delta_E");
  const auto& a = c.vec("photodetach.pol_axis");
  s.pol_axis = {a[0], a[1], a[2]};
  if (c.text("recoil.mode") == "kick") s.kick = KickConfig{c.real("recoil.kick_v"), c.real("recoil.kick_azimuth")};
  s.rings = {c.real("recoil.ring_panel"), static_cast<int>(c.integer("recoil.ring_nodes"))};
  s.geom = {c.real("geometry.d"), c.real("geometry.H")};
  s.n_max = static_cast<int>(c.integer("geometry.n_max"));
  s.z_max = c.real("geometry.z_max");
  s.fresnel_panel = c.real("numerics.fresnel_panel");
  s.fresnel_order = static_cast<int>(c.integer("numerics.fresnel_order"));
  s.prefactor = c.text("numerics.prefactor") == "tau" ? Prefactor::kFallTime : Prefactor::kTotalTime;
  s.ring_prune = c.real("numerics.ring_prune");
  return s;
}

inline SamplerSpec sampler_spec(const RunConfig& c) {
  SamplerSpec s;
  s.points_per_period = c.real("numerics.points_per_period");
  s.window_sigmas = c.real("numerics.window_sigmas");
  s.rejection = c.flag("sampler.rejection");
  s.envelope = c.real("sampler.envelope");
  s.binomial_count = c.flag("sampler.binomial");
  return s;
}

inline ScanSpec scan_spec(const RunConfig& c) {
  ScanSpec s;
  s.points = static_cast<int>(c.integer("scan.points"));
  s.half_width = c.real("scan.half_width");
  s.max_widen = static_cast<int>(c.integer("scan.max_widen"));
  s.fit_window = c.real("scan.fit_window");
  return s;
}

inline LikelihoodSpec likelihood_spec(const RunConfig& c) {
  LikelihoodSpec s;
  s.form = c.text("likelihood.form") == "extended" ? LikelihoodForm::kExtended : LikelihoodForm::kConditional;
  s.floor = c.real("likelihood.floor");
  return s;
}

inline FisherSpec fisher_spec(const RunConfig& c) {
  FisherSpec s;
  s.rel_steps = c.vec("fisher.steps");
  s.points_per_period = c.real("numerics.points_per_period");
  s.window_sigmas = c.real("numerics.window_sigmas");
  return s;
}

}  // namespace gbarq
