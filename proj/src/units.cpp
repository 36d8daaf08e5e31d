#include "bohmkit/units.hpp"

#include <cmath>

#include "bohmkit/error.hpp"

namespace bohmkit {

UnitSystem parse_unit_system(std::string_view name) {
  if (name == "internal") return UnitSystem::internal;
  if (name == "atomic" || name == "au") return UnitSystem::atomic;
  if (name == "eV-nm-fs" || name == "ev_nm_fs") return UnitSystem::ev_nm_fs;
  throw ConfigError("unknown unit system '" + std::string(name) +
                    "' (expected internal, atomic or eV-nm-fs)");
}

std::string_view to_string(UnitSystem s) {
  switch (s) {
    case UnitSystem::internal: return "internal";
    case UnitSystem::atomic: return "atomic";
    case UnitSystem::ev_nm_fs: return "eV-nm-fs";
  }
  return "internal";
}

PhysicalUnits::PhysicalUnits(UnitSystem system) : system_(system) {
  switch (system) {
    case UnitSystem::internal:
    case UnitSystem::atomic:
      // Atomic units already have hbar = m_e = 1.
      break;
    case UnitSystem::ev_nm_fs: {
      // E_u = hbar^2 / (m_e nm^2), tau_u = hbar / E_u.
      const double hc = codata::hbar_c_eV_nm;
      energy_unit_ = hc * hc / codata::electron_mass_eV;
      time_unit_ = codata::hbar_eV_fs / energy_unit_;
      break;
    }
  }
}

double PhysicalUnits::wavevector_for_energy(double e, double mass) const {
  detail::require(e >= 0.0, "kinetic energy must be non-negative");
  return std::sqrt(2.0 * mass * energy_to_internal(e));
}

}  // namespace bohmkit
