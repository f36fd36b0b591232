#ifndef PAINTTRAP_EVAPORATION_HPP
#define PAINTTRAP_EVAPORATION_HPP

#include <array>
#include <iosfwd>
#include <vector>

#include "painttrap/errors.hpp"
#include "painttrap/trap.hpp"

namespace painttrap {

// One evaporation ramp: linear control interpolation over its duration.
struct RampSegment {
    double duration_s = 0.0;
    std::array<double, 2> power_start_W{};
    std::array<double, 2> power_end_W{};
    std::array<double, 2> stroke_start_m{};
    std::array<double, 2> stroke_end_m{};
    double gradient_start_Tpm = 0.0;
    double gradient_end_Tpm = 0.0;
    bool jump = false; // start deliberately differs from the previous end
};

// Evaporation segments followed by a constant hold and a linear power
// ramp-up (strokes and gradient stay at their final values).
struct RampSchedule {
    std::vector<RampSegment> segments;
    double hold_s = 0.0;
    double rampup_s = 0.0;
    std::array<double, 2> rampup_power_W{};

    double evaporation_s() const;
    double duration_s() const; // evaporation + hold + ramp-up
    void validate() const;     // throws std::invalid_argument
};

struct Controls {
    std::array<double, 2> power_W{};
    std::array<double, 2> stroke_m{};
    double gradient_Tpm = 0.0;

    bool operator==(const Controls&) const = default;
};

// Piecewise-linear control values; t must lie within [0, duration].
Controls interpolate_controls(const RampSchedule& schedule, double t_s);

// Static description of one beam path: geometry plus AOD calibration.
// Power and stroke are dynamic (from Controls).
struct BeamLine {
    Beam beam;
    PaintingSpec painting;
    enum class Shape { uniform, parabolic } shape = Shape::parabolic;
};

struct TrapSetup {
    std::array<BeamLine, 2> lines;
    bool gravity = true;
    PhysicalConstants constants;
};

// Instantiate the trap for one instant of the schedule. Strokes below
// 1e-3 of the waist collapse to an unpainted beam.
TrapConfig make_trap_config(const TrapSetup& setup, const Controls& controls);

struct MolassesParams {
    double atoms = 0.0;
    double temperature_K = 0.0;
    double radius_m = 0.0; // 1/e density radius of the Gaussian cloud

    void validate() const;
};

struct CloudState {
    std::array<double, 3> number{}; // m_F = -1, 0, +1
    double temperature_K = 0.0;
    double t_s = 0.0;

    double total() const { return number[0] + number[1] + number[2]; }
};

// Truncated-Boltzmann evaporation coefficients. All three model constants
// are configurable so the dynamics can be re-fitted.
struct EvapModel {
    double tau_bg_s = 10.0;           // background (vacuum) lifetime
    double collision_prefactor = 0.5; // gamma_el = prefactor * n0 sigma vbar
    double loss_coefficient = 2.0;    // Ndot/N = -coeff (eta-4) e^-eta gamma_el
    double energy_offset = 0.0;       // extra removed energy per atom, kB T units
    double l3_m6_per_s = 0.0;         // optional three-body coefficient (0 = off)
};

// The slice of a TrapCharacterization the rate equations consume.
struct TrapProperties {
    double mean_angular_freq = 0.0; // rad/s
    std::array<double, 3> depth_J{};
};

// Linear drift of the properties across a recharacterization interval.
struct TrapPropertiesRate {
    double mean_angular_freq = 0.0;
    std::array<double, 3> depth_J{};
};

TrapProperties properties_of(const TrapCharacterization& c);

// Peak density for the harmonic-trap Boltzmann gas.
double peak_density(double n_total, double mean_angular_freq, double temperature_K,
                    const PhysicalConstants& constants);

// Elastic collision rate gamma_el.
double collision_rate(double n_total, double mean_angular_freq, double temperature_K,
                      const EvapModel& model, const PhysicalConstants& constants);

// One fixed-step RK4 update of the truncated-Boltzmann model over dt.
// Per spin s with eta_s = depth_s/(kB T):
//   eta > 4: Ndot/N = -c (eta-4) e^-eta gamma_el, removed energy
//            (eta + (eta-5)/(eta-4)) kB T per atom;
//   eta <= 4 (overfull trap): free spill at the trap oscillation rate of
//            the truncated-Boltzmann population above the depth.
// Shared temperature: Tdot/T = sum_s (Ndot_s/N_tot)(<E_s>/(3kBT) - 1)
// + adiabatic term d ln(omega_bar)/dt. Background loss is energy-neutral.
// Throws PhysicsError if the temperature leaves (0, inf).
CloudState evaporation_step(const CloudState& state, const TrapProperties& props,
                            const TrapPropertiesRate& rate, double dt_s,
                            const EvapModel& model, const PhysicalConstants& constants);

// Phase-space density N_tot (hbar omega_bar / kB T)^3.
double psd(const CloudState& state, double mean_angular_freq);

struct BecStats {
    double t_crit_K = 0.0;
    double condensate_fraction = 0.0;
};

// Harmonic-trap ideal-gas condensation: T_c = (hbar omega/kB)(N/zeta3)^(1/3),
// fraction = max(0, 1 - (T/T_c)^3).
BecStats bec_stats(const CloudState& state, double mean_angular_freq);

// Truncation capture model: atoms of a Gaussian molasses cloud (centered at
// the beam crossing) are kept where the optical well is deeper than kB T_mol,
// split evenly over the three Zeeman levels.
CloudState load_from_molasses(const TrapSetup& setup, const Controls& controls,
                              const MolassesParams& molasses);

struct SimOptions {
    double dt_s = 1e-4;
    double recharacterize_every_s = 2e-3;
};

struct TrajectoryPoint {
    double t_s = 0.0;
    Controls controls;
    TrapCharacterization trap;
    CloudState state;
    std::array<double, 3> eta{};
    double gamma_el_Hz = 0.0;
    double psd = 0.0;
    double condensate_fraction = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
};

// A schedule simulation failure (untrapped instant, negative temperature),
// carrying the failure time and the trajectory up to it.
struct ScheduleError : PhysicsError {
    double t_fail_s = 0.0;
    Trajectory partial;
    ScheduleError(const std::string& what, double t, Trajectory p)
        : PhysicsError(what), t_fail_s(t), partial(std::move(p)) {}
};

// March the schedule: characterize the trap every recharacterize_every_s
// (controls interpolated, results interpolated linearly in between) and
// integrate the evaporation model with fixed steps of at most dt_s.
Trajectory run_schedule(const TrapSetup& setup, const RampSchedule& schedule,
                        const CloudState& initial, const SimOptions& opts = {},
                        const EvapModel& model = {});

// Column order is a contract:
// t_s,P1_W,P2_W,xs1_m,xs2_m,Bp_Tpm,fx_Hz,fy_Hz,fz_Hz,depth0_uK,depthpm1_uK,
// N_m1,N_0,N_p1,T_K,eta0,gamma_el_Hz,psd,cond_frac
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os);

struct Overheads {
    double mot_s = 0.0;
    double molasses_s = 0.0;
    double detection_s = 0.0;
};

// MOT + molasses + schedule (evaporation + hold + ramp-up) + detection.
double cycle_time(const RampSchedule& schedule, const Overheads& overheads);

} // namespace painttrap

#endif
