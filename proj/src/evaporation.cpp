#include "painttrap/evaporation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace painttrap {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

double RampSchedule::evaporation_s() const {
    double d = 0.0;
    for (const RampSegment& s : segments) d += s.duration_s;
    return d;
}

double RampSchedule::duration_s() const { return evaporation_s() + hold_s + rampup_s; }

void RampSchedule::validate() const {
    for (size_t k = 0; k < segments.size(); ++k) {
        const RampSegment& s = segments[k];
        if (s.duration_s <= 0.0)
            throw std::invalid_argument("schedule: segment duration must be positive");
        for (int b = 0; b < 2; ++b) {
            if (s.power_start_W[static_cast<size_t>(b)] < 0.0 ||
                s.power_end_W[static_cast<size_t>(b)] < 0.0)
                throw std::invalid_argument("schedule: powers must be non-negative");
            if (s.stroke_start_m[static_cast<size_t>(b)] < 0.0 ||
                s.stroke_end_m[static_cast<size_t>(b)] < 0.0)
                throw std::invalid_argument("schedule: strokes must be non-negative");
        }
        if (s.gradient_start_Tpm < 0.0 || s.gradient_end_Tpm < 0.0)
            throw std::invalid_argument("schedule: gradient must be non-negative");
        if (k > 0 && !s.jump) {
            const RampSegment& prev = segments[k - 1];
            const bool continuous = s.power_start_W == prev.power_end_W &&
                                    s.stroke_start_m == prev.stroke_end_m &&
                                    s.gradient_start_Tpm == prev.gradient_end_Tpm;
            if (!continuous)
                throw std::invalid_argument(
                    "schedule: discontinuous segment boundary without a jump flag");
        }
    }
    if (hold_s < 0.0 || rampup_s < 0.0)
        throw std::invalid_argument("schedule: hold and ramp-up must be non-negative");
    if (rampup_power_W[0] < 0.0 || rampup_power_W[1] < 0.0)
        throw std::invalid_argument("schedule: ramp-up powers must be non-negative");
}

Controls interpolate_controls(const RampSchedule& schedule, double t_s) {
    const double total = schedule.duration_s();
    if (t_s < 0.0 || t_s > total * (1.0 + 1e-12) + 1e-15)
        throw std::out_of_range("schedule: time outside [0, duration]");
    t_s = std::min(t_s, total);

    Controls c;
    double t = t_s;
    for (const RampSegment& s : schedule.segments) {
        if (t <= s.duration_s) {
            const double u = t / s.duration_s;
            for (size_t b = 0; b < 2; ++b) {
                c.power_W[b] = s.power_start_W[b] + u * (s.power_end_W[b] - s.power_start_W[b]);
                c.stroke_m[b] = s.stroke_start_m[b] + u * (s.stroke_end_m[b] - s.stroke_start_m[b]);
            }
            c.gradient_Tpm =
                s.gradient_start_Tpm + u * (s.gradient_end_Tpm - s.gradient_start_Tpm);
            return c;
        }
        t -= s.duration_s;
    }
    // Past the evaporation ramps: hold, then power ramp-up.
    if (schedule.segments.empty())
        throw std::out_of_range("schedule: no segments to interpolate");
    const RampSegment& last = schedule.segments.back();
    c.power_W = last.power_end_W;
    c.stroke_m = last.stroke_end_m;
    c.gradient_Tpm = last.gradient_end_Tpm;
    if (t <= schedule.hold_s) return c;
    t -= schedule.hold_s;
    const double u = schedule.rampup_s > 0.0 ? std::min(t / schedule.rampup_s, 1.0) : 1.0;
    for (size_t b = 0; b < 2; ++b)
        c.power_W[b] += u * (schedule.rampup_power_W[b] - c.power_W[b]);
    return c;
}

TrapConfig make_trap_config(const TrapSetup& setup, const Controls& controls) {
    TrapConfig cfg;
    cfg.gravity = setup.gravity;
    cfg.constants = setup.constants;
    cfg.gradient_Tpm = controls.gradient_Tpm;
    for (size_t b = 0; b < 2; ++b) {
        const BeamLine& line = setup.lines[b];
        PaintedBeam pb;
        pb.beam = line.beam;
        pb.beam.power_W = controls.power_W[b];
        const double stroke = controls.stroke_m[b];
        const double w_min = std::min(pb.beam.waist_x_m, pb.beam.waist_y_m);
        if (stroke < 1e-3 * w_min)
            pb.paint = PaintProfile::delta();
        else if (line.shape == BeamLine::Shape::uniform)
            pb.paint = PaintProfile::uniform(stroke);
        else
            pb.paint = PaintProfile::parabolic(stroke);
        cfg.beams[b] = std::move(pb);
    }
    return cfg;
}

void MolassesParams::validate() const {
    if (atoms < 0.0) throw std::invalid_argument("molasses: atom number must be non-negative");
    if (temperature_K <= 0.0)
        throw std::invalid_argument("molasses: temperature must be positive");
    if (radius_m <= 0.0) throw std::invalid_argument("molasses: radius must be positive");
}

TrapProperties properties_of(const TrapCharacterization& c) {
    return {c.mean_angular_freq, c.depth_J};
}

double peak_density(double n_total, double mean_angular_freq, double temperature_K,
                    const PhysicalConstants& constants) {
    if (n_total <= 0.0 || temperature_K <= 0.0) return 0.0;
    const double w3 = mean_angular_freq * mean_angular_freq * mean_angular_freq;
    const double th = constants.atom_mass_kg / (2.0 * kPi * k_boltzmann * temperature_K);
    return n_total * w3 * th * std::sqrt(th);
}

double collision_rate(double n_total, double mean_angular_freq, double temperature_K,
                      const EvapModel& model, const PhysicalConstants& constants) {
    if (temperature_K <= 0.0) return 0.0;
    const double n0 = peak_density(n_total, mean_angular_freq, temperature_K, constants);
    const double vbar =
        std::sqrt(8.0 * k_boltzmann * temperature_K / (kPi * constants.atom_mass_kg));
    return model.collision_prefactor * n0 * constants.collision_cross_section() * vbar;
}

namespace {

struct StateVec {
    std::array<double, 3> n{};
    double T = 0.0;
};

StateVec derivatives(const StateVec& y, double tau, const TrapProperties& props,
                     const TrapPropertiesRate& rate, const EvapModel& model,
                     const PhysicalConstants& constants) {
    const double T = y.T;
    if (!(T > 0.0) || !std::isfinite(T))
        throw PhysicsError("evaporation: temperature left (0, inf) during integration");

    const double wbar = props.mean_angular_freq + tau * rate.mean_angular_freq;
    std::array<double, 3> n{};
    double n_total = 0.0;
    for (size_t s = 0; s < 3; ++s) {
        n[s] = std::max(y.n[s], 0.0);
        n_total += n[s];
    }

    StateVec d;
    double t_log = 0.0; // sum of (Ndot_s/N_tot)(<E_s>/(3kT) - 1) terms
    if (n_total > 0.0) {
        const double gamma = collision_rate(n_total, wbar, T, model, constants);
        const double n0 = peak_density(n_total, wbar, T, constants);
        for (size_t s = 0; s < 3; ++s) {
            if (n[s] <= 0.0) continue;
            const double depth = std::max(props.depth_J[s] + tau * rate.depth_J[s], 0.0);
            const double eta = depth / (k_boltzmann * T);
            double rel = 0.0; // evaporative/spill Ndot_s / N_s
            double q = 0.0;   // rel * (<E>/(3 kB T) - 1)
            if (eta > 4.0) {
                const double c = model.loss_coefficient * std::exp(-eta) * gamma;
                rel = -c * (eta - 4.0);
                // (eta-4) x ((eta + (eta-5)/(eta-4))/3 - 1) stays bounded
                // as eta -> 4; expand the product to avoid the 0/0.
                q = -c *
                    ((eta - 4.0) * (eta - 3.0) + (eta - 5.0) +
                     (eta - 4.0) * model.energy_offset) /
                    3.0;
            } else {
                // Overfull trap: population above the depth leaves at the
                // trap oscillation rate without needing a collision.
                const double spill_frac = std::exp(-eta) * (1.0 + eta + 0.5 * eta * eta);
                const double spill_rate = wbar / (2.0 * kPi) * spill_frac;
                rel = -spill_rate;
                const double e_kt = (((eta + 3.0) * eta + 6.0) * eta + 6.0) /
                                    ((eta + 2.0) * eta + 2.0);
                q = rel * (e_kt / 3.0 - 1.0);
            }
            double dn = rel * n[s];
            t_log += q * n[s] / n_total;
            dn -= n[s] / model.tau_bg_s; // background loss, energy-neutral
            if (model.l3_m6_per_s > 0.0) {
                // Three-body loss at <n^2> = n0^2/(3 sqrt(3)); removes
                // atoms of mean energy 2 kB T (density-weighted).
                const double r3 = model.l3_m6_per_s * n0 * n0 / (3.0 * std::sqrt(3.0));
                dn -= r3 * n[s];
                t_log += -r3 * (n[s] / n_total) * (2.0 / 3.0 - 1.0);
            }
            d.n[s] = dn;
        }
    }
    const double adiabatic = wbar > 0.0 ? rate.mean_angular_freq / wbar : 0.0;
    d.T = T * (t_log + adiabatic);
    return d;
}

} // namespace

CloudState evaporation_step(const CloudState& state, const TrapProperties& props,
                            const TrapPropertiesRate& rate, double dt_s,
                            const EvapModel& model, const PhysicalConstants& constants) {
    if (dt_s <= 0.0) throw std::invalid_argument("evaporation: dt must be positive");

    StateVec y{state.number, state.temperature_K};
    auto add = [](const StateVec& a, double h, const StateVec& b) {
        StateVec r;
        for (size_t s = 0; s < 3; ++s) r.n[s] = a.n[s] + h * b.n[s];
        r.T = a.T + h * b.T;
        return r;
    };

    const StateVec k1 = derivatives(y, 0.0, props, rate, model, constants);
    const StateVec k2 = derivatives(add(y, 0.5 * dt_s, k1), 0.5 * dt_s, props, rate, model, constants);
    const StateVec k3 = derivatives(add(y, 0.5 * dt_s, k2), 0.5 * dt_s, props, rate, model, constants);
    const StateVec k4 = derivatives(add(y, dt_s, k3), dt_s, props, rate, model, constants);

    CloudState out;
    for (size_t s = 0; s < 3; ++s)
        out.number[s] = std::max(
            y.n[s] + dt_s / 6.0 * (k1.n[s] + 2.0 * k2.n[s] + 2.0 * k3.n[s] + k4.n[s]), 0.0);
    out.temperature_K = y.T + dt_s / 6.0 * (k1.T + 2.0 * k2.T + 2.0 * k3.T + k4.T);
    out.t_s = state.t_s + dt_s;
    if (!(out.temperature_K > 0.0) || !std::isfinite(out.temperature_K))
        throw PhysicsError("evaporation: temperature left (0, inf)");
    return out;
}

double psd(const CloudState& state, double mean_angular_freq) {
    if (state.temperature_K <= 0.0)
        throw std::invalid_argument("psd: temperature must be positive");
    const double x = hbar * mean_angular_freq / (k_boltzmann * state.temperature_K);
    return state.total() * x * x * x;
}

BecStats bec_stats(const CloudState& state, double mean_angular_freq) {
    BecStats out;
    const double n_total = state.total();
    if (n_total <= 0.0 || mean_angular_freq <= 0.0) return out;
    out.t_crit_K = hbar * mean_angular_freq / k_boltzmann * std::cbrt(n_total / zeta3);
    if (state.temperature_K < out.t_crit_K) {
        const double r = state.temperature_K / out.t_crit_K;
        out.condensate_fraction = 1.0 - r * r * r;
    }
    return out;
}

CloudState load_from_molasses(const TrapSetup& setup, const Controls& controls,
                              const MolassesParams& molasses) {
    molasses.validate();
    const TrapConfig cfg = make_trap_config(setup, controls);
    cfg.validate();

    // Keep an atom where the optical well is deeper than its thermal
    // energy; weight by the Gaussian cloud density. Midpoint grids over
    // +-3 radii capture > 99.9% of the cloud mass. Both beams run
    // horizontally, so the capturable region is a thin horizontal slab no
    // taller than a few waists: the vertical axis gets its own, finer
    // range, and the mass normalization integrates the axes separately
    // (full +-3 radii vertically) so the ratio stays a true fraction.
    const double kt = k_boltzmann * molasses.temperature_K;
    const int n = 41;
    const double r = molasses.radius_m;
    const double half = 3.0 * r;
    double z_half = 0.0;
    for (const PaintedBeam& pb : cfg.beams)
        z_half = std::max({z_half, 4.0 * pb.beam.waist_x_m, 4.0 * pb.beam.waist_y_m});
    z_half = std::min(z_half, half);

    const double dx = 2.0 * half / n;
    const double dz = 2.0 * z_half / n;
    double kept = 0.0; // integral of the cloud density over the captured set
    for (int i = 0; i < n; ++i) {
        const double x = -half + (i + 0.5) * dx;
        for (int j = 0; j < n; ++j) {
            const double y = -half + (j + 0.5) * dx;
            const double wxy = std::exp(-(x * x + y * y) / (r * r));
            for (int k = 0; k < n; ++k) {
                const double z = -z_half + (k + 0.5) * dz;
                double u_opt = 0.0;
                for (const PaintedBeam& pb : cfg.beams)
                    u_opt += cfg.constants.dipole_coefficient *
                             painted_intensity(pb.beam, pb.paint, {x, y, z});
                if (-u_opt > kt) kept += wxy * std::exp(-z * z / (r * r)) * dx * dx * dz;
            }
        }
    }
    double line = 0.0; // one-axis midpoint integral of exp(-u^2/r^2) over +-3r
    for (int i = 0; i < n; ++i) {
        const double u = -half + (i + 0.5) * dx;
        line += std::exp(-u * u / (r * r)) * dx;
    }
    const double mass = line * line * line;

    CloudState out;
    const double captured = mass > 0.0 ? molasses.atoms * kept / mass : 0.0;
    out.number = {captured / 3.0, captured / 3.0, captured / 3.0};
    out.temperature_K = molasses.temperature_K;
    out.t_s = 0.0;
    return out;
}

namespace {

TrajectoryPoint make_point(double t, const Controls& controls, const TrapCharacterization& trap,
                           const CloudState& state, const EvapModel& model,
                           const PhysicalConstants& constants) {
    TrajectoryPoint p;
    p.t_s = t;
    p.controls = controls;
    p.trap = trap;
    p.state = state;
    const double kt = k_boltzmann * state.temperature_K;
    for (size_t s = 0; s < 3; ++s) p.eta[s] = kt > 0.0 ? trap.depth_J[s] / kt : 0.0;
    p.gamma_el_Hz = collision_rate(state.total(), trap.mean_angular_freq, state.temperature_K,
                                   model, constants);
    p.psd = state.temperature_K > 0.0 ? psd(state, trap.mean_angular_freq) : 0.0;
    p.condensate_fraction = bec_stats(state, trap.mean_angular_freq).condensate_fraction;
    return p;
}

} // namespace

Trajectory run_schedule(const TrapSetup& setup, const RampSchedule& schedule,
                        const CloudState& initial, const SimOptions& opts,
                        const EvapModel& model) {
    schedule.validate();
    if (opts.dt_s <= 0.0 || opts.recharacterize_every_s < opts.dt_s)
        throw std::invalid_argument("simulation: need 0 < dt <= recharacterize interval");
    for (const RampSegment& s : schedule.segments)
        if (opts.recharacterize_every_s > s.duration_s / 4.0 * (1.0 + 1e-12))
            throw std::invalid_argument(
                "simulation: recharacterize interval must be <= shortest segment / 4");

    Trajectory traj;
    const double total = schedule.duration_s();
    if (total <= 0.0) {
        TrajectoryPoint p;
        p.state = initial;
        traj.points.push_back(p);
        return traj;
    }

    // Recharacterization knots; the last interval may be shorter.
    std::vector<double> knots;
    for (double t = 0.0; t < total - 1e-12; t += opts.recharacterize_every_s)
        knots.push_back(t);
    knots.push_back(total);

    CloudState state = initial;
    Eigen::Vector3d seed = Eigen::Vector3d::Zero();
    Controls prev_controls;
    TrapCharacterization prev_char;
    bool have_prev = false;

    auto characterize_at = [&](double t) {
        const Controls c = interpolate_controls(schedule, t);
        if (have_prev && c == prev_controls) return prev_char; // hold phases
        const TrapConfig cfg = make_trap_config(setup, c);
        TrapCharacterization ch;
        try {
            ch = characterize_trap(cfg, seed);
        } catch (const PhysicsError& e) {
            throw ScheduleError(std::string(e.what()) + " at t = " + std::to_string(t) + " s",
                                t, std::move(traj));
        }
        seed = ch.minimum;
        prev_controls = c;
        prev_char = ch;
        have_prev = true;
        return ch;
    };

    TrapCharacterization char_now = characterize_at(0.0);
    traj.points.push_back(make_point(0.0, interpolate_controls(schedule, 0.0), char_now, state,
                                     model, setup.constants));

    for (size_t k = 0; k + 1 < knots.size(); ++k) {
        const double t0 = knots[k];
        const double t1 = knots[k + 1];
        const TrapCharacterization char_next = characterize_at(t1);

        const TrapProperties p0 = properties_of(char_now);
        const TrapProperties p1 = properties_of(char_next);
        TrapPropertiesRate rate;
        rate.mean_angular_freq = (p1.mean_angular_freq - p0.mean_angular_freq) / (t1 - t0);
        for (size_t s = 0; s < 3; ++s)
            rate.depth_J[s] = (p1.depth_J[s] - p0.depth_J[s]) / (t1 - t0);

        const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opts.dt_s - 1e-9)));
        const double dt = (t1 - t0) / steps;
        for (int i = 0; i < steps; ++i) {
            TrapProperties at;
            at.mean_angular_freq = p0.mean_angular_freq + i * dt * rate.mean_angular_freq;
            for (size_t s = 0; s < 3; ++s)
                at.depth_J[s] = p0.depth_J[s] + i * dt * rate.depth_J[s];
            try {
                state = evaporation_step(state, at, rate, dt, model, setup.constants);
            } catch (const PhysicsError& e) {
                throw ScheduleError(std::string(e.what()) + " at t = " +
                                        std::to_string(t0 + (i + 1) * dt) + " s",
                                    t0 + (i + 1) * dt, std::move(traj));
            }
        }
        state.t_s = t1; // avoid accumulated rounding in the timestamp

        char_now = char_next;
        traj.points.push_back(make_point(t1, interpolate_controls(schedule, t1), char_now, state,
                                         model, setup.constants));
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os) {
    os << "t_s,P1_W,P2_W,xs1_m,xs2_m,Bp_Tpm,fx_Hz,fy_Hz,fz_Hz,depth0_uK,depthpm1_uK,"
          "N_m1,N_0,N_p1,T_K,eta0,gamma_el_Hz,psd,cond_frac\n";
    char line[640];
    for (const TrajectoryPoint& p : trajectory.points) {
        const double depth0_uK = p.trap.depth_J[1] / k_boltzmann * 1e6;
        const double depthpm_uK = p.trap.depth_J[0] / k_boltzmann * 1e6;
        std::snprintf(line, sizeof(line),
                      "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                      "%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      p.t_s, p.controls.power_W[0], p.controls.power_W[1],
                      p.controls.stroke_m[0], p.controls.stroke_m[1], p.controls.gradient_Tpm,
                      p.trap.freq_Hz[0], p.trap.freq_Hz[1], p.trap.freq_Hz[2], depth0_uK,
                      depthpm_uK, p.state.number[0], p.state.number[1], p.state.number[2],
                      p.state.temperature_K, p.eta[1], p.gamma_el_Hz, p.psd,
                      p.condensate_fraction);
        os << line;
    }
}

double cycle_time(const RampSchedule& schedule, const Overheads& overheads) {
    if (overheads.mot_s < 0.0 || overheads.molasses_s < 0.0 || overheads.detection_s < 0.0)
        throw std::invalid_argument("cycle time: overheads must be non-negative");
    return overheads.mot_s + overheads.molasses_s + schedule.duration_s() +
           overheads.detection_s;
}

} // namespace painttrap
