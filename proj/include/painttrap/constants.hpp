#ifndef PAINTTRAP_CONSTANTS_HPP
#define PAINTTRAP_CONSTANTS_HPP

#include <cmath>
#include <numbers>

namespace painttrap {

//
// General physical constants (SI)
//
inline constexpr double k_boltzmann = 1.380649e-23;       // J/K
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double speed_of_light = 299792458.0;     // m/s
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T
inline constexpr double bohr_radius = 5.29177210903e-11;  // m
inline constexpr double standard_gravity = 9.80665;       // m/s^2
inline constexpr double zeta3 = 1.2020569031595943;       // Riemann zeta(3)

//
// Rb-87 ground state, trapped at 1064 nm
//
inline constexpr double rb87_mass_kg = 1.4431608951127549e-25;
inline constexpr double rb87_scattering_length_m = 100.4 * bohr_radius;

// Potential energy per unit intensity for the F=1 ground state in linearly
// polarized 1064 nm light, from the two-line (D1/D2) formula with
// counter-rotating terms. Negative: red-detuned light attracts.
inline constexpr double rb87_dipole_coefficient_1064 = -2.1034303249678663e-36; // J/(W/m^2)

// |g_F| of the 5S1/2 F=1 manifold.
inline constexpr double rb87_lande_gf_abs = 0.5;

struct PhysicalConstants {
    double atom_mass_kg = rb87_mass_kg;
    double scattering_length_m = rb87_scattering_length_m;
    double dipole_coefficient = rb87_dipole_coefficient_1064; // J/(W/m^2), < 0
    double lande_gf_abs = rb87_lande_gf_abs;
    double gravity_m_per_s2 = standard_gravity;

    double collision_cross_section() const {
        return 8.0 * std::numbers::pi * scattering_length_m * scattering_length_m;
    }

    void validate() const; // throws std::invalid_argument
};

} // namespace painttrap

#endif
