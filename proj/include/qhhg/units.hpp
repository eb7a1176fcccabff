#ifndef QHHG_UNITS_HPP
#define QHHG_UNITS_HPP

#include <stdexcept>
#include <string>

namespace qhhg {

// Hartree atomic units throughout the library (hbar = e = m_e = 1, eps0 = 1/4pi).
// SI appears only at I/O boundaries through the conversions below.
namespace constants {
inline constexpr double c_au = 137.035999084;              // speed of light (au)
inline constexpr double hartree_eV = 27.211386245988;      // 1 Hartree in eV
inline constexpr double bohr_m = 5.29177210903e-11;        // 1 bohr in m
inline constexpr double au_time_s = 2.4188843265857e-17;   // 1 au time in s
inline constexpr double au_efield_V_per_m = 5.14220674763e11;
inline constexpr double au_intensity_W_per_cm2 = 3.50944758e16;
inline constexpr double hbar_SI = 1.054571817e-34;         // J s
inline constexpr double eps0_SI = 8.8541878128e-12;        // F/m
inline constexpr double c_SI = 2.99792458e8;               // m/s
inline constexpr double hartree_J = 4.3597447222071e-18;   // J
}  // namespace constants

enum class UnitKind { length, time, energy, efield, intensity, frequency };

// Conversion factor: value_SI = factor * value_au.
inline double si_per_au(UnitKind kind) {
    switch (kind) {
        case UnitKind::length:    return constants::bohr_m;
        case UnitKind::time:      return constants::au_time_s;
        case UnitKind::energy:    return constants::hartree_J;
        case UnitKind::efield:    return constants::au_efield_V_per_m;
        case UnitKind::intensity: return constants::au_intensity_W_per_cm2;  // W/cm^2
        case UnitKind::frequency: return 1.0 / constants::au_time_s;         // rad/s
    }
    throw std::invalid_argument("si_per_au: unknown unit kind");
}

inline double to_atomic_units(double value_si, UnitKind kind) {
    return value_si / si_per_au(kind);
}

inline double from_atomic_units(double value_au, UnitKind kind) {
    return value_au * si_per_au(kind);
}

inline UnitKind unit_kind_from_string(const std::string& s) {
    if (s == "length") return UnitKind::length;
    if (s == "time") return UnitKind::time;
    if (s == "energy") return UnitKind::energy;
    if (s == "efield") return UnitKind::efield;
    if (s == "intensity") return UnitKind::intensity;
    if (s == "frequency") return UnitKind::frequency;
    throw std::invalid_argument("unknown unit kind: " + s);
}

}  // namespace qhhg

#endif  // QHHG_UNITS_HPP
