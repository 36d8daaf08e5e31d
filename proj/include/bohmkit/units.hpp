#pragma once

#include <string>
#include <string_view>

namespace bohmkit {

/// CODATA 2018 values used for unit conversion.
namespace codata {
inline constexpr double hbar_eV_fs = 0.6582119569;         // eV fs
inline constexpr double hbar_c_eV_nm = 197.3269804;        // eV nm
inline constexpr double electron_mass_eV = 510998.95;      // m_e c^2 in eV
inline constexpr double hartree_eV = 27.211386245988;      // eV
inline constexpr double bohr_nm = 0.0529177210903;         // nm
inline constexpr double atomic_time_fs = 0.02418884326585; // fs
}  // namespace codata

enum class UnitSystem { internal, atomic, ev_nm_fs };

UnitSystem parse_unit_system(std::string_view name);
std::string_view to_string(UnitSystem s);

/// Conversion between a user-facing unit system and the internal units
/// (hbar = 1, reference mass = 1). Lengths keep the system's native length
/// unit (nm or bohr), so wavevectors also convert one-to-one.
class PhysicalUnits {
 public:
  explicit PhysicalUnits(UnitSystem system = UnitSystem::internal);

  UnitSystem system() const { return system_; }

  // Size of one internal unit expressed in the system's own units.
  double energy_unit() const { return energy_unit_; }  // eV, Hartree or 1
  double time_unit() const { return time_unit_; }      // fs, a.u. or 1
  double length_unit() const { return 1.0; }
  double mass_unit() const { return 1.0; }            // electron masses

  double energy_to_internal(double e) const { return e / energy_unit_; }
  double energy_from_internal(double e) const { return e * energy_unit_; }
  double time_to_internal(double t) const { return t / time_unit_; }
  double time_from_internal(double t) const { return t * time_unit_; }
  double length_to_internal(double x) const { return x; }
  double length_from_internal(double x) const { return x; }
  double velocity_to_internal(double v) const { return v * time_unit_; }
  double velocity_from_internal(double v) const { return v / time_unit_; }
  /// Force constants such as F in U = F (x1 - x2)^2 (energy per length^2).
  double stiffness_to_internal(double f) const { return f / energy_unit_; }
  double stiffness_from_internal(double f) const { return f * energy_unit_; }

  /// Wavevector of a free particle with kinetic energy e (system units) and
  /// mass m (electron masses).
  double wavevector_for_energy(double e, double mass = 1.0) const;

 private:
  UnitSystem system_;
  double energy_unit_ = 1.0;
  double time_unit_ = 1.0;
};

}  // namespace bohmkit
