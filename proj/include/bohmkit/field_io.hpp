#pragma once

#include <filesystem>
#include <string>

#include "bohmkit/units.hpp"
#include "bohmkit/wavefunction.hpp"

namespace bohmkit {

/// Raw dump: `<base>.bin` holds little-endian float64 (re, im) pairs in
/// row-major node order; `<base>.json` is the sidecar header
/// {dims, points, spacing, origin, time, units, boundary, hbar, mass}.
void write_field_dump(const WaveFunction& wf, const std::filesystem::path& base,
                      UnitSystem units = UnitSystem::internal);

WaveFunction read_field_dump(const std::filesystem::path& base);

}  // namespace bohmkit
