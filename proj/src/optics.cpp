#include "painttrap/optics.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace painttrap {

void PhysicalConstants::validate() const {
    if (!(atom_mass_kg > 0.0))
        throw std::invalid_argument("constants: atom mass must be positive");
    if (!(scattering_length_m > 0.0))
        throw std::invalid_argument("constants: scattering length must be positive");
    if (!(dipole_coefficient < 0.0))
        throw std::invalid_argument("constants: dipole coefficient must be negative (red detuning)");
    if (!(lande_gf_abs > 0.0))
        throw std::invalid_argument("constants: |g_F| must be positive");
    if (!(gravity_m_per_s2 >= 0.0))
        throw std::invalid_argument("constants: gravity must be non-negative");
}

double Beam::rayleigh_x_m() const {
    return std::numbers::pi * waist_x_m * waist_x_m / wavelength_m;
}

double Beam::rayleigh_y_m() const {
    return std::numbers::pi * waist_y_m * waist_y_m / wavelength_m;
}

void Beam::validate() const {
    if (!(power_W >= 0.0))
        throw std::invalid_argument("beam: power must be >= 0");
    if (!(waist_x_m > 0.0) || !(waist_y_m > 0.0))
        throw std::invalid_argument("beam: waists must be positive");
    if (!(wavelength_m > 0.0))
        throw std::invalid_argument("beam: wavelength must be positive");
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("beam: axis must be a unit vector");
    if (std::abs(paint_axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("beam: paint_axis must be a unit vector");
    if (std::abs(axis.dot(paint_axis)) > 1e-9)
        throw std::invalid_argument("beam: paint_axis must be orthogonal to axis");
}

Eigen::Vector3d beam_local(const Beam& beam, const Eigen::Vector3d& point) {
    const Eigen::Vector3d d = point - beam.focus_m;
    const Eigen::Vector3d ey = beam.axis.cross(beam.paint_axis);
    return {d.dot(beam.paint_axis), d.dot(ey), d.dot(beam.axis)};
}

double gaussian_intensity(const Beam& beam, const Eigen::Vector3d& point) {
    const Eigen::Vector3d local = beam_local(beam, point);
    const double z = local.z();
    const double zx = z / beam.rayleigh_x_m();
    const double zy = z / beam.rayleigh_y_m();
    const double wx = beam.waist_x_m * std::sqrt(1.0 + zx * zx);
    const double wy = beam.waist_y_m * std::sqrt(1.0 + zy * zy);
    const double peak = 2.0 * beam.power_W / (std::numbers::pi * wx * wy);
    const double ex = local.x() / wx;
    const double ey = local.y() / wy;
    return peak * std::exp(-2.0 * (ex * ex + ey * ey));
}

double dipole_potential(double intensity_W_m2, const PhysicalConstants& constants) {
    return constants.dipole_coefficient * intensity_W_m2;
}

} // namespace painttrap
