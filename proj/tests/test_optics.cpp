#include <doctest.h>

#include <cmath>
#include <numbers>

#include "painttrap/optics.hpp"

using namespace painttrap;

namespace {

// 20 W, 35 um round beam along z; painting displaces along x.
Beam reference_beam() {
    Beam b;
    b.power_W = 20.0;
    b.waist_x_m = 35e-6;
    b.waist_y_m = 35e-6;
    b.axis = Eigen::Vector3d::UnitZ();
    b.paint_axis = Eigen::Vector3d::UnitX();
    return b;
}

} // namespace

TEST_SUITE("optics") {

TEST_CASE("peak intensity is 2P/(pi wx wy)") {
    const Beam b = reference_beam();
    const double i0 = gaussian_intensity(b, Eigen::Vector3d::Zero());
    CHECK(i0 == doctest::Approx(1.0393792202e10).epsilon(1e-9));
    CHECK(i0 == doctest::Approx(2.0 * b.power_W /
                                (std::numbers::pi * b.waist_x_m * b.waist_y_m))
                    .epsilon(1e-12));
}

TEST_CASE("transverse profile falls to e^-2 at one waist") {
    const Beam b = reference_beam();
    const double i0 = gaussian_intensity(b, Eigen::Vector3d::Zero());
    const double ix = gaussian_intensity(b, {b.waist_x_m, 0.0, 0.0});
    const double iy = gaussian_intensity(b, {0.0, b.waist_y_m, 0.0});
    CHECK(ix == doctest::Approx(i0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(iy == doctest::Approx(i0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("axial intensity halves at the Rayleigh range") {
    const Beam b = reference_beam();
    const double zr = b.rayleigh_x_m();
    CHECK(zr == doctest::Approx(std::numbers::pi * b.waist_x_m * b.waist_x_m /
                                b.wavelength_m)
                    .epsilon(1e-12));
    CHECK(zr == doctest::Approx(3.6169652262e-3).epsilon(1e-9));
    const double i0 = gaussian_intensity(b, Eigen::Vector3d::Zero());
    const double izr = gaussian_intensity(b, {0.0, 0.0, zr});
    CHECK(izr == doctest::Approx(0.5 * i0).epsilon(1e-12));
}

TEST_CASE("elliptical beam separates the two transverse waists") {
    Beam b = reference_beam();
    b.waist_y_m = 70e-6;
    const double i0 = gaussian_intensity(b, Eigen::Vector3d::Zero());
    CHECK(i0 == doctest::Approx(2.0 * b.power_W /
                                (std::numbers::pi * 35e-6 * 70e-6))
                    .epsilon(1e-12));
    CHECK(gaussian_intensity(b, {35e-6, 0.0, 0.0}) ==
          doctest::Approx(i0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(gaussian_intensity(b, {0.0, 70e-6, 0.0}) ==
          doctest::Approx(i0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(b.rayleigh_y_m() == doctest::Approx(4.0 * b.rayleigh_x_m()).epsilon(1e-12));
}

TEST_CASE("beam_local resolves points onto (paint, transverse, axis)") {
    Beam b = reference_beam();
    b.focus_m = {1e-3, -2e-3, 0.5e-3};
    const Eigen::Vector3d p = b.focus_m + 2e-6 * b.paint_axis + 7e-6 * b.axis;
    const Eigen::Vector3d local = beam_local(b, p);
    CHECK(local.x() == doctest::Approx(2e-6).epsilon(1e-12));
    CHECK(local.y() == doctest::Approx(0.0).scale(1e-9));
    CHECK(local.z() == doctest::Approx(7e-6).epsilon(1e-12));
}

TEST_CASE("dipole potential is attractive and linear in intensity") {
    PhysicalConstants c;
    const double u1 = dipole_potential(1e10, c);
    CHECK(u1 < 0.0);
    CHECK(dipole_potential(2e10, c) == doctest::Approx(2.0 * u1).epsilon(1e-12));
    CHECK(dipole_potential(0.0, c) == 0.0);
    // Reference trap scale: 20 W in a 35 um waist is a ~1.58 mK trap.
    const Beam b = reference_beam();
    const double u0 = -dipole_potential(gaussian_intensity(b, Eigen::Vector3d::Zero()), c);
    CHECK(u0 / k_boltzmann * 1e6 == doctest::Approx(1583.502955).epsilon(1e-9));
}

TEST_CASE("validate rejects malformed beams") {
    Beam b = reference_beam();
    b.power_W = -1.0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b = reference_beam();
    b.waist_x_m = 0.0;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b = reference_beam();
    b.axis = {0.0, 0.0, 2.0};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b = reference_beam();
    b.paint_axis = b.axis; // parallel, not orthogonal
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    CHECK_NOTHROW(reference_beam().validate());
}

} // TEST_SUITE
