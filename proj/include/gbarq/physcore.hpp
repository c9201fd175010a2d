#pragma once
// Physical constants, gravitational scales and the dimensionless unit system.
//
// All internal computations run in units anchored to the acceleration g under
// evaluation:
//   length   l_g = (hbar^2 / (2 m^2 g))^(1/3)
//   energy   eps_g = m g l_g
//   time     t_g = hbar / eps_g
//   velocity v_g = g t_g
// In these units the vertical Hamiltonian above the mirror is -d^2/dx^2 + x,
// the free propagator kernel is (4 pi i s)^(-1/2) exp(i (X - x)^2 / (4 s)),
// and a plane wave exp(i p z / hbar) reads exp(i P x) with P = p / (m v_g).

#include <cmath>
#include <string>
#include <string_view>

#include "gbarq/errors.hpp"

namespace gbarq {

struct PhysicalConstants {
  double hbar = 1.054571817e-34;         // J s
  double m_atom = 1.6735e-27;            // kg, hydrogen mass (CPT-equal)
  double m_positron = 9.1093837015e-31;  // kg
  double g_ref = 9.81;                   // m/s^2
  double e_charge = 1.602176634e-19;     // J/eV

  bool valid() const noexcept {
    return hbar > 0 && m_atom > 0 && m_positron > 0 && g_ref > 0 && e_charge > 0 &&
           m_positron / m_atom < 1e-3;
  }
};

inline const PhysicalConstants& constants() {
  static const PhysicalConstants c{};
  return c;
}

struct ScaleSet {
  double g = 0;      // m/s^2
  double l_g = 0;    // m
  double eps_g = 0;  // J
  double t_g = 0;    // s
  double v_g = 0;    // m/s
  double mass = 0;   // kg, the mass the scales were built for
  double hbar = 0;   // J s

  // momentum unit m v_g; satisfies (m v_g) l_g / hbar == 1
  double p_g() const noexcept { return mass * v_g; }
};

inline ScaleSet derive_scales(double g, const PhysicalConstants& pc = constants()) {
  if (!(g > 0) || !std::isfinite(g)) throw DomainError("derive_scales: g must be positive and finite");
  ScaleSet s;
  s.g = g;
  s.mass = pc.m_atom;
  s.hbar = pc.hbar;
  s.l_g = std::cbrt(pc.hbar * pc.hbar / (2.0 * pc.m_atom * pc.m_atom * g));
  s.eps_g = pc.m_atom * g * s.l_g;
  s.t_g = pc.hbar / s.eps_g;
  s.v_g = g * s.t_g;
  return s;
}

enum class QuantityKind { kLength, kTime, kEnergy, kVelocity, kMomentum };

inline std::string_view to_string(QuantityKind k) {
  switch (k) {
    case QuantityKind::kLength: return "length";
    case QuantityKind::kTime: return "time";
    case QuantityKind::kEnergy: return "energy";
    case QuantityKind::kVelocity: return "velocity";
    case QuantityKind::kMomentum: return "momentum";
  }
  return "?";
}

inline QuantityKind quantity_kind_from(std::string_view name) {
  if (name == "length") return QuantityKind::kLength;
  if (name == "time") return QuantityKind::kTime;
  if (name == "energy") return QuantityKind::kEnergy;
  if (name == "velocity") return QuantityKind::kVelocity;
  if (name == "momentum") return QuantityKind::kMomentum;
  throw DomainError("unknown quantity kind '" + std::string(name) + "'");
}

inline double unit_of(QuantityKind k, const ScaleSet& s) {
  switch (k) {
    case QuantityKind::kLength: return s.l_g;
    case QuantityKind::kTime: return s.t_g;
    case QuantityKind::kEnergy: return s.eps_g;
    case QuantityKind::kVelocity: return s.v_g;
    case QuantityKind::kMomentum: return s.p_g();
  }
  throw DomainError("unit_of: bad quantity kind");
}

inline double nondimensionalize(double value_si, QuantityKind k, const ScaleSet& s) {
  if (!std::isfinite(value_si)) throw DomainError("nondimensionalize: non-finite value");
  return value_si / unit_of(k, s);
}

inline double dimensionalize(double value, QuantityKind k, const ScaleSet& s) {
  if (!std::isfinite(value)) throw DomainError("dimensionalize: non-finite value");
  return value * unit_of(k, s);
}

// A value tagged with its SI unit symbol, e.g. {5.87e-6, "m"}; rejects
// conversions when the unit does not belong to the requested kind.
inline std::string_view si_unit(QuantityKind k) {
  switch (k) {
    case QuantityKind::kLength: return "m";
    case QuantityKind::kTime: return "s";
    case QuantityKind::kEnergy: return "J";
    case QuantityKind::kVelocity: return "m/s";
    case QuantityKind::kMomentum: return "kg*m/s";
  }
  return "?";
}

inline double nondimensionalize(double value_si, std::string_view unit, QuantityKind k,
                                const ScaleSet& s) {
  if (unit != si_unit(k)) {
    throw DomainError("unit mismatch: '" + std::string(unit) + "' is not a " +
                      std::string(to_string(k)) + " unit");
  }
  return nondimensionalize(value_si, k, s);
}

}  // namespace gbarq
