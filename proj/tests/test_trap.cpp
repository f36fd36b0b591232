#include <doctest.h>

#include <cmath>
#include <numbers>

#include "painttrap/errors.hpp"
#include "painttrap/trap.hpp"

using namespace painttrap;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Single static 20 W / 35 um beam along z, no gravity: every trap number
// has a closed form.
TrapConfig static_single_beam() {
    TrapConfig cfg;
    cfg.beams[0].beam.power_W = 20.0;
    cfg.beams[0].beam.waist_x_m = 35e-6;
    cfg.beams[0].beam.waist_y_m = 35e-6;
    cfg.beams[0].beam.axis = Eigen::Vector3d::UnitZ();
    cfg.beams[0].beam.paint_axis = Eigen::Vector3d::UnitX();
    cfg.beams[0].paint = PaintProfile::delta();
    cfg.beams[1].beam.power_W = 0.0;
    cfg.beams[1].beam.waist_x_m = 1e-5;
    cfg.beams[1].beam.waist_y_m = 1e-5;
    cfg.beams[1].beam.axis = Eigen::Vector3d::UnitY();
    cfg.beams[1].beam.paint_axis = Eigen::Vector3d::UnitX();
    cfg.beams[1].paint = PaintProfile::delta();
    cfg.gravity = false;
    return cfg;
}

// The two crossed painted beams of the production scenario at full power.
TrapConfig crossed_painted(double gradient_Tpm) {
    TrapConfig cfg;
    cfg.beams[0].beam.power_W = 20.0;
    cfg.beams[0].beam.waist_x_m = 35e-6;
    cfg.beams[0].beam.waist_y_m = 35e-6;
    cfg.beams[0].beam.axis = Eigen::Vector3d::UnitX();
    cfg.beams[0].beam.paint_axis = Eigen::Vector3d::UnitY();
    cfg.beams[0].paint = PaintProfile::parabolic(1.1e-3);
    cfg.beams[1].beam.power_W = 0.5;
    cfg.beams[1].beam.waist_x_m = 5e-6;
    cfg.beams[1].beam.waist_y_m = 5e-6;
    cfg.beams[1].beam.axis = Eigen::Vector3d::UnitY();
    cfg.beams[1].beam.paint_axis = Eigen::Vector3d::UnitX();
    cfg.beams[1].paint = PaintProfile::parabolic(2.1e-4);
    cfg.gravity = true;
    cfg.gradient_Tpm = gradient_Tpm;
    return cfg;
}

} // namespace

TEST_SUITE("trap") {

TEST_CASE("static single-beam characterization matches the closed forms") {
    const TrapConfig cfg = static_single_beam();
    const TrapCharacterization ch = characterize_trap(cfg, Eigen::Vector3d::Zero());

    const Beam& b = cfg.beams[0].beam;
    const double i0 = 2.0 * b.power_W / (std::numbers::pi * b.waist_x_m * b.waist_y_m);
    const double u0 = -cfg.constants.dipole_coefficient * i0;
    const double m = cfg.constants.atom_mass_kg;
    const double zr = b.rayleigh_x_m();
    const double fr = std::sqrt(4.0 * u0 / (m * b.waist_x_m * b.waist_x_m)) / two_pi;
    const double fax = std::sqrt(2.0 * u0 / (m * zr * zr)) / two_pi;

    CHECK(ch.minimum.norm() < 1e-7);
    CHECK(ch.freq_Hz[0] == doctest::Approx(fr).epsilon(0.01));
    CHECK(ch.freq_Hz[1] == doctest::Approx(fr).epsilon(0.01));
    CHECK(ch.freq_Hz[2] == doctest::Approx(fax).epsilon(0.01));
    CHECK(fr == doctest::Approx(3539.776055).epsilon(1e-6));
    CHECK(fax == doctest::Approx(24.220578).epsilon(1e-6));
    for (SpinState s : all_spins)
        CHECK(ch.depth(s) == doctest::Approx(u0).epsilon(0.01));
    CHECK(ch.potential_min_J == doctest::Approx(-u0).epsilon(1e-6));
    CHECK(ch.mean_angular_freq ==
          doctest::Approx(two_pi * std::cbrt(ch.freq_Hz[0] * ch.freq_Hz[1] * ch.freq_Hz[2]))
              .epsilon(1e-12));
}

TEST_CASE("parabolic painting writes a harmonic well across the stroke") {
    TrapConfig cfg = static_single_beam();
    cfg.beams[0].beam.power_W = 0.5;
    cfg.beams[0].beam.waist_x_m = 5e-6;
    cfg.beams[0].beam.waist_y_m = 5e-6;
    const double xs = 150e-6;
    cfg.beams[0].paint = PaintProfile::parabolic(xs);
    const TrapCharacterization ch = characterize_trap(cfg, Eigen::Vector3d::Zero());

    const Beam& b = cfg.beams[0].beam;
    const double i0 = 2.0 * b.power_W / (std::numbers::pi * b.waist_x_m * b.waist_y_m);
    const double w = b.waist_x_m;
    // averaged peak = 3 w sqrt(pi/2)/(4 xs) x static peak, minus the
    // parabola's curvature sampled over the blur width
    const double upk = -cfg.constants.dipole_coefficient * i0 * 3.0 * w *
                       std::sqrt(std::numbers::pi / 2.0) / (4.0 * xs) *
                       (1.0 - w * w / (4.0 * xs * xs));
    const double peak_num =
        -cfg.constants.dipole_coefficient *
        painted_intensity(b, cfg.beams[0].paint, Eigen::Vector3d::Zero());
    CHECK(peak_num == doctest::Approx(upk).epsilon(2e-3));

    // curvature along the painted axis: U(x) = -Upk (1 - x^2/xs^2)
    const double m = cfg.constants.atom_mass_kg;
    const double fpaint = std::sqrt(2.0 * upk / (m * xs * xs)) / two_pi;
    CHECK(ch.freq_Hz[0] == doctest::Approx(fpaint).epsilon(0.01));
    // transverse confinement is the plain waist at the averaged peak
    const double ftrans = std::sqrt(4.0 * peak_num / (m * w * w)) / two_pi;
    CHECK(ch.freq_Hz[1] == doctest::Approx(ftrans).epsilon(0.01));
    CHECK(ch.freq_Hz[2] < 0.08 * ch.freq_Hz[1]); // axial is far softer
    // escape from the averaged well costs the averaged peak
    CHECK(ch.depth(SpinState::zero) == doctest::Approx(peak_num).epsilon(0.01));
}

TEST_CASE("gravity sags the minimum and erodes the depth") {
    // horizontal 0.2 W beam: gravity acts along a stiff transverse axis,
    // so the sag stays harmonic and the erosion is a ~20% effect
    TrapConfig cfg = static_single_beam();
    cfg.beams[0].beam.axis = Eigen::Vector3d::UnitX();
    cfg.beams[0].beam.paint_axis = Eigen::Vector3d::UnitY();
    cfg.beams[0].beam.power_W = 0.2;
    const TrapCharacterization rigid = characterize_trap(cfg, Eigen::Vector3d::Zero());
    cfg.gravity = true;
    const TrapCharacterization sagged = characterize_trap(cfg, Eigen::Vector3d::Zero());

    CHECK(sagged.minimum.z() < 0.0);
    const double wz = two_pi * rigid.freq_Hz[2];
    const double sag = cfg.constants.gravity_m_per_s2 / (wz * wz);
    CHECK(sagged.minimum.z() == doctest::Approx(-sag).epsilon(0.1));
    CHECK(sagged.depth(SpinState::zero) < 0.95 * rigid.depth(SpinState::zero));
}

TEST_CASE("magnetic gradient weakens only the stretched states") {
    const TrapConfig bare = crossed_painted(0.0);
    const TrapCharacterization ch0 = characterize_trap(bare, Eigen::Vector3d::Zero());
    CHECK(ch0.depth(SpinState::minus_one) ==
          doctest::Approx(ch0.depth(SpinState::zero)).epsilon(1e-9));
    CHECK(ch0.depth(SpinState::plus_one) ==
          doctest::Approx(ch0.depth(SpinState::zero)).epsilon(1e-9));

    const TrapConfig tilted = crossed_painted(0.67);
    const TrapCharacterization ch = characterize_trap(tilted, Eigen::Vector3d::Zero());
    CHECK(ch.depth(SpinState::minus_one) < ch.depth(SpinState::zero));
    CHECK(ch.depth(SpinState::plus_one) < ch.depth(SpinState::zero));
    CHECK(ch.depth(SpinState::minus_one) ==
          doctest::Approx(ch.depth(SpinState::plus_one)).epsilon(1e-9));

    // the potential difference is exactly the linear Zeeman tilt
    const Eigen::Vector3d at{2e-5, -1e-5, 1.5e-5};
    const double du = total_potential(tilted, at, SpinState::plus_one) -
                      total_potential(tilted, at, SpinState::zero);
    const double expected =
        -tilted.constants.lande_gf_abs * bohr_magneton * 0.67 * at.z();
    CHECK(du == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("a beam too weak to hold against gravity reports untrapped") {
    TrapConfig cfg = static_single_beam();
    cfg.gravity = true;
    cfg.beams[0].beam.power_W = 1e-6;
    CHECK_THROWS_AS(find_minimum(cfg, SpinState::zero, Eigen::Vector3d::Zero()),
                    UntrappedError);
}

TEST_CASE("trap extent tracks the widest painted beam") {
    const TrapConfig cfg = crossed_painted(0.0);
    CHECK(trap_extent(cfg) == doctest::Approx(1.1e-3 + 35e-6).epsilon(1e-12));
}

TEST_CASE("hessian at the minimum is symmetric positive definite") {
    const TrapConfig cfg = crossed_painted(0.0);
    const Eigen::Vector3d min = find_minimum(cfg, SpinState::zero, Eigen::Vector3d::Zero());
    const Eigen::Matrix3d h = potential_hessian(cfg, SpinState::zero, min);
    CHECK((h - h.transpose()).norm() / h.norm() < 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

} // TEST_SUITE
