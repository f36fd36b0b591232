#ifndef PAINTTRAP_OPTICS_HPP
#define PAINTTRAP_OPTICS_HPP

#include <Eigen/Core>

#include "painttrap/constants.hpp"

namespace painttrap {

// A focused Gaussian beam, ideal TEM00 (M^2 = 1), possibly elliptical.
// waist_* are 1/e^2 intensity radii at the focus. paint_axis is the
// horizontal transverse direction the AOD displaces the beam along;
// it must be a unit vector orthogonal to axis.
struct Beam {
    double power_W = 0.0;
    double waist_x_m = 0.0; // along paint_axis
    double waist_y_m = 0.0; // along axis x paint_axis
    double wavelength_m = 1064e-9;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
    Eigen::Vector3d focus_m = Eigen::Vector3d::Zero();
    Eigen::Vector3d paint_axis = Eigen::Vector3d::UnitY();

    double rayleigh_x_m() const;
    double rayleigh_y_m() const;

    void validate() const; // throws std::invalid_argument
};

// Beam-local coordinates of a lab-frame point: (x along paint_axis,
// y along axis x paint_axis, z along axis, all relative to the focus).
Eigen::Vector3d beam_local(const Beam& beam, const Eigen::Vector3d& point);

// Intensity of the static beam at a lab-frame point, W/m^2.
double gaussian_intensity(const Beam& beam, const Eigen::Vector3d& point);

// Optical dipole potential for a given local intensity, J. Negative for
// red-detuned light (dipole_coefficient < 0).
double dipole_potential(double intensity_W_m2, const PhysicalConstants& constants);

} // namespace painttrap

#endif
