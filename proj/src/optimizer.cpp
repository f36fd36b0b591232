#include "painttrap/optimizer.hpp"

#include "painttrap/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace painttrap {

void ParameterSpace::validate() const {
    if (params.empty()) throw std::invalid_argument("parameter space: empty");
    for (const ParamDesc& d : params)
        if (!(d.lower < d.upper))
            throw std::invalid_argument("parameter space: need lower < upper for " + d.name);
}

double ParameterSpace::reflect(size_t index, double value) const {
    const ParamDesc& d = params[index];
    const double span = d.upper - d.lower;
    double t = std::fmod(value - d.lower, 2.0 * span);
    if (t < 0.0) t += 2.0 * span;
    const double r = t <= span ? d.lower + t : d.upper - (t - span);
    return std::clamp(r, d.lower, d.upper);
}

void DeConfig::validate() const {
    if (population < 4) throw std::invalid_argument("DE: population must be >= 4");
    if (!(weight > 0.0) || weight > 2.0)
        throw std::invalid_argument("DE: weight must be in (0, 2]");
    if (crossover < 0.0 || crossover > 1.0)
        throw std::invalid_argument("DE: crossover must be in [0, 1]");
    if (generations < 0) throw std::invalid_argument("DE: generations must be >= 0");
    if (threads < 1) throw std::invalid_argument("DE: threads must be >= 1");
}

namespace {

// Results are written by member index, so values are identical for any
// thread count; only the wall-time fields vary.
void evaluate_all(const Objective& objective, const std::vector<std::vector<double>>& xs,
                  std::vector<double>& values, std::vector<double>& wall_s, int threads) {
    const int n = static_cast<int>(xs.size());
    values.assign(xs.size(), 0.0);
    wall_s.assign(xs.size(), 0.0);
    auto work = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            double v;
            try {
                v = objective(xs[static_cast<size_t>(i)]);
            } catch (...) {
                v = -std::numeric_limits<double>::infinity();
            }
            values[static_cast<size_t>(i)] = v;
            wall_s[static_cast<size_t>(i)] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    if (threads <= 1 || n <= 1) {
        work(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const int per = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * per;
        const int end = std::min(n, begin + per);
        if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (std::thread& th : pool) th.join();
}

} // namespace

DeResult de_optimize(const Objective& objective, const ParameterSpace& space,
                     const DeConfig& cfg) {
    space.validate();
    cfg.validate();
    const int np = cfg.population;
    const size_t K = space.size();

    std::vector<std::vector<double>> pop(static_cast<size_t>(np));
    for (int i = 0; i < np; ++i) {
        StreamRng rng(cfg.seed, 0, static_cast<std::uint64_t>(i));
        auto& x = pop[static_cast<size_t>(i)];
        x.resize(K);
        for (size_t j = 0; j < K; ++j)
            x[j] = rng.uniform(space.params[j].lower, space.params[j].upper);
    }

    DeResult result;
    std::vector<double> value, wall;
    evaluate_all(objective, pop, value, wall, cfg.threads);
    for (int i = 0; i < np; ++i)
        result.record.evaluations.push_back(
            {0, i, value[static_cast<size_t>(i)], pop[static_cast<size_t>(i)],
             wall[static_cast<size_t>(i)]});
    result.record.best_curve.push_back(*std::max_element(value.begin(), value.end()));

    std::vector<std::vector<double>> trial(static_cast<size_t>(np));
    std::vector<double> trial_value, trial_wall;
    for (int g = 1; g <= cfg.generations; ++g) {
        for (int i = 0; i < np; ++i) {
            StreamRng rng(cfg.seed, static_cast<std::uint64_t>(g),
                          static_cast<std::uint64_t>(i));
            const auto distinct = [&](std::initializer_list<int> taken) {
                int r;
                do {
                    r = static_cast<int>(rng.below(static_cast<std::uint64_t>(np)));
                } while (std::find(taken.begin(), taken.end(), r) != taken.end());
                return r;
            };
            const int a = distinct({i});
            const int b = distinct({i, a});
            const int c = distinct({i, a, b});
            const size_t jrand = static_cast<size_t>(rng.below(K));

            auto& u = trial[static_cast<size_t>(i)];
            u = pop[static_cast<size_t>(i)];
            for (size_t j = 0; j < K; ++j) {
                const bool cross = rng.uniform() < cfg.crossover;
                if (cross || j == jrand) {
                    const double v = pop[static_cast<size_t>(a)][j] +
                                     cfg.weight * (pop[static_cast<size_t>(b)][j] -
                                                   pop[static_cast<size_t>(c)][j]);
                    u[j] = space.reflect(j, v);
                }
            }
        }
        evaluate_all(objective, trial, trial_value, trial_wall, cfg.threads);
        for (int i = 0; i < np; ++i) {
            const size_t si = static_cast<size_t>(i);
            result.record.evaluations.push_back({g, i, trial_value[si], trial[si], trial_wall[si]});
            if (trial_value[si] >= value[si]) { // ties accepted: drift on plateaus
                pop[si] = trial[si];
                value[si] = trial_value[si];
            }
        }
        result.record.best_curve.push_back(*std::max_element(value.begin(), value.end()));
    }

    const size_t best =
        static_cast<size_t>(std::max_element(value.begin(), value.end()) - value.begin());
    result.best_params = pop[best];
    result.best_value = value[best];
    return result;
}

void write_runrecord_csv(const RunRecord& record, std::ostream& os) {
    os << "generation,member,objective";
    const size_t K = record.evaluations.empty() ? 0 : record.evaluations.front().params.size();
    char buf[64];
    for (size_t j = 1; j <= K; ++j) {
        std::snprintf(buf, sizeof(buf), ",p%zu", j);
        os << buf;
    }
    os << '\n';
    for (const Evaluation& e : record.evaluations) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g", e.generation, e.member, e.objective);
        os << buf;
        for (double p : e.params) {
            std::snprintf(buf, sizeof(buf), ",%.17g", p);
            os << buf;
        }
        os << '\n';
    }
}

double simulate_condensed_atoms(const SimContext& ctx, const RampSchedule& schedule) {
    try {
        const Controls start = interpolate_controls(schedule, 0.0);
        const CloudState initial = load_from_molasses(ctx.setup, start, ctx.molasses);
        if (initial.total() <= 0.0) return 0.0;
        const Trajectory traj = run_schedule(ctx.setup, schedule, initial, ctx.sim, ctx.model);
        const TrajectoryPoint& end = traj.points.back();
        return end.state.total() * end.condensate_fraction;
    } catch (const PhysicsError&) {
        return 0.0;
    }
}

namespace {

double gradient_at(double bp_init, double t_off, double t) {
    if (t_off <= 0.0) return 0.0;
    return bp_init * std::max(0.0, 1.0 - t / t_off);
}

} // namespace

ParameterSpace stage2_space(const RampSchedule& tmpl) {
    if (tmpl.segments.empty())
        throw std::invalid_argument("stage 2: template needs at least one segment");
    const RampSegment& first = tmpl.segments.front();
    const std::array<double, 2> p_max = {std::max(1.1 * first.power_start_W[0], 1e-2),
                                         std::max(1.1 * first.power_start_W[1], 1e-2)};
    const std::array<double, 2> s_max = {std::max(1.1 * first.stroke_start_m[0], 1e-5),
                                         std::max(1.1 * first.stroke_start_m[1], 1e-5)};
    ParameterSpace space;
    char name[64];
    for (size_t k = 0; k < tmpl.segments.size(); ++k) {
        for (int b = 0; b < 2; ++b) {
            std::snprintf(name, sizeof(name), "seg%zu_P%d_end", k + 1, b + 1);
            space.params.push_back({name, 0.0, p_max[static_cast<size_t>(b)], "W"});
        }
        for (int b = 0; b < 2; ++b) {
            std::snprintf(name, sizeof(name), "seg%zu_xs%d_end", k + 1, b + 1);
            space.params.push_back({name, 0.0, s_max[static_cast<size_t>(b)], "m"});
        }
    }
    space.params.push_back({"Bp_init", 0.0, 1.0, "T/m"});
    space.params.push_back(
        {"Bp_off", 5e-3, std::max(tmpl.evaporation_s(), 1e-2), "s"});
    return space;
}

RampSchedule decode_stage2(const RampSchedule& tmpl, std::span<const double> params) {
    const size_t S = tmpl.segments.size();
    if (params.size() != 4 * S + 2)
        throw std::invalid_argument("stage 2: wrong parameter count");
    const double bp_init = params[4 * S];
    const double t_off = params[4 * S + 1];

    RampSchedule out = tmpl;
    double t = 0.0;
    for (size_t k = 0; k < S; ++k) {
        RampSegment& seg = out.segments[k];
        if (k == 0) {
            seg.power_start_W = tmpl.segments[0].power_start_W;
            seg.stroke_start_m = tmpl.segments[0].stroke_start_m;
        } else {
            seg.power_start_W = out.segments[k - 1].power_end_W;
            seg.stroke_start_m = out.segments[k - 1].stroke_end_m;
        }
        seg.power_end_W = {params[4 * k], params[4 * k + 1]};
        seg.stroke_end_m = {params[4 * k + 2], params[4 * k + 3]};
        seg.gradient_start_Tpm = gradient_at(bp_init, t_off, t);
        t += seg.duration_s;
        seg.gradient_end_Tpm = gradient_at(bp_init, t_off, t);
        seg.jump = false;
    }
    return out;
}

std::vector<double> encode_stage2(const RampSchedule& schedule) {
    const size_t S = schedule.segments.size();
    if (S == 0) throw std::invalid_argument("stage 2: schedule has no segments");
    std::vector<double> p(4 * S + 2, 0.0);
    for (size_t k = 0; k < S; ++k) {
        p[4 * k] = schedule.segments[k].power_end_W[0];
        p[4 * k + 1] = schedule.segments[k].power_end_W[1];
        p[4 * k + 2] = schedule.segments[k].stroke_end_m[0];
        p[4 * k + 3] = schedule.segments[k].stroke_end_m[1];
    }
    const double bp_init = schedule.segments.front().gradient_start_Tpm;
    p[4 * S] = bp_init;
    // Recover the switch-off time from the latest boundary where the
    // gradient is still positive; if the first boundary is already zero any
    // t_off at or below it reproduces the stored per-segment values.
    double t = 0.0;
    double t_off = schedule.segments.front().duration_s;
    if (bp_init > 0.0) {
        for (const RampSegment& seg : schedule.segments) {
            t += seg.duration_s;
            const double g = seg.gradient_end_Tpm;
            if (g > 0.0 && g < bp_init) t_off = t / (1.0 - g / bp_init);
        }
        // The division above can land an ulp off the t_off that produced the
        // stored samples; nudge until every boundary value reproduces exactly.
        auto reproduces = [&](double cand) {
            double tt = 0.0;
            for (const RampSegment& seg : schedule.segments) {
                if (gradient_at(bp_init, cand, tt) != seg.gradient_start_Tpm)
                    return false;
                tt += seg.duration_s;
                if (gradient_at(bp_init, cand, tt) != seg.gradient_end_Tpm)
                    return false;
            }
            return true;
        };
        if (!reproduces(t_off)) {
            double up = t_off;
            double down = t_off;
            for (int k = 0; k < 4; ++k) {
                up = std::nextafter(up, std::numeric_limits<double>::infinity());
                down = std::nextafter(down, 0.0);
                if (reproduces(up)) {
                    t_off = up;
                    break;
                }
                if (reproduces(down)) {
                    t_off = down;
                    break;
                }
            }
        }
    }
    p[4 * S + 1] = t_off;
    return p;
}

ParameterSpace stage1_space() {
    return ParameterSpace{{
        {"cool_power", 0.1, 1.0, "rel"},
        {"cool_detuning", -8.0, -1.0, "Gamma"},
        {"repump_power", 0.05, 1.0, "rel"},
        {"repump_detuning", -4.0, 0.0, "Gamma"},
        {"pump_power", 0.0, 1.0, "rel"},
        {"pump_detuning", -4.0, 0.0, "Gamma"},
        {"mot_duration", 0.05, 0.3, "s"},
        {"molasses_duration", 0.005, 0.05, "s"},
        {"molasses_detuning", -12.0, -2.0, "Gamma"},
        {"push_power", 0.0, 1.0, "rel"},
        {"P1_init", 5.0, 22.0, "W"},
        {"P2_init", 0.1, 0.55, "W"},
        {"xs1_init", 1e-4, 1.3e-3, "m"},
        {"xs2_init", 2e-5, 2.5e-4, "m"},
    }};
}

// SYNTHETIC loading surrogate. Smooth, unimodal-ish response of the
// molasses cloud to the laser settings: saturation in the powers, Gaussian
// resonance profiles in the detunings, monotone gain with MOT load time
// and mild reheating for short or far-detuned molasses. Not derived from
// the physics; it exists so the loading stage has a non-trivial optimum.
MolassesParams molasses_surrogate(std::span<const double> laser) {
    if (laser.size() < 10) throw std::invalid_argument("surrogate: expected 10 laser values");
    const double cool_p = laser[0], cool_d = laser[1];
    const double rep_p = laser[2], rep_d = laser[3];
    const double pump_p = laser[4], pump_d = laser[5];
    const double mot_s = laser[6], mol_s = laser[7];
    const double mol_d = laser[8], push_p = laser[9];

    auto bump = [](double x, double x0, double width) {
        const double u = (x - x0) / width;
        return std::exp(-u * u);
    };
    double n = 4e9;
    n *= mot_s / (mot_s + 0.1);
    n *= cool_p / (cool_p + 0.2) * bump(cool_d, -3.5, 2.5);
    n *= 0.3 + 0.7 * rep_p / (rep_p + 0.1) * bump(rep_d, -1.5, 2.0);
    n *= 0.6 + 0.4 * pump_p / (pump_p + 0.3) * bump(pump_d, -2.0, 1.5);
    n *= std::exp(-0.25 * push_p * push_p);

    double t = 18e-6;
    t *= 0.75 + 0.25 * ((mol_d + 8.0) / 3.0) * ((mol_d + 8.0) / 3.0);
    t *= 1.0 - 0.3 * mol_s / (mol_s + 0.01);

    MolassesParams out;
    out.atoms = n;
    out.temperature_K = t;
    out.radius_m = 4e-4 * std::sqrt(t / 12e-6);
    return out;
}

Stage1Result decode_stage1(std::span<const double> params, const RampSchedule& tmpl) {
    if (params.size() != 14) throw std::invalid_argument("stage 1: expected 14 parameters");
    if (tmpl.segments.empty())
        throw std::invalid_argument("stage 1: template needs at least one segment");
    Stage1Result out;
    out.molasses = molasses_surrogate(params.first(10));
    out.initial.power_W = {params[10], params[11]};
    out.initial.stroke_m = {params[12], params[13]};
    out.initial.gradient_Tpm = tmpl.segments.front().gradient_start_Tpm;
    return out;
}

RampSchedule apply_stage1(const RampSchedule& tmpl, const Stage1Result& s) {
    RampSchedule out = tmpl;
    RampSegment& first = out.segments.front();
    first.power_start_W = s.initial.power_W;
    first.stroke_start_m = s.initial.stroke_m;
    first.gradient_start_Tpm = s.initial.gradient_Tpm;
    first.jump = false;
    return out;
}

TwoStageResult two_stage_optimize(const SimContext& ctx, const DeConfig& stage1_cfg,
                                  const DeConfig& stage2_cfg) {
    TwoStageResult out;

    const ParameterSpace s1 = stage1_space();
    const Objective f1 = [&ctx](std::span<const double> p) {
        const Stage1Result r = decode_stage1(p, ctx.schedule);
        SimContext local = ctx;
        local.molasses = r.molasses;
        return simulate_condensed_atoms(local, apply_stage1(ctx.schedule, r));
    };
    out.stage1 = de_optimize(f1, s1, stage1_cfg);

    const Stage1Result best1 = decode_stage1(out.stage1.best_params, ctx.schedule);
    SimContext ctx2 = ctx;
    ctx2.molasses = best1.molasses;
    ctx2.schedule = apply_stage1(ctx.schedule, best1);
    out.molasses = best1.molasses;

    const ParameterSpace s2 = stage2_space(ctx2.schedule);
    const Objective f2 = [&ctx2](std::span<const double> p) {
        return simulate_condensed_atoms(ctx2, decode_stage2(ctx2.schedule, p));
    };
    out.stage2 = de_optimize(f2, s2, stage2_cfg);
    out.best_schedule = decode_stage2(ctx2.schedule, out.stage2.best_params);
    return out;
}

ParameterSpace sphere_space(int dim) {
    if (dim < 1) throw std::invalid_argument("sphere: dimension must be >= 1");
    ParameterSpace space;
    char name[32];
    for (int i = 0; i < dim; ++i) {
        std::snprintf(name, sizeof(name), "x%d", i + 1);
        space.params.push_back({name, -5.0, 5.0, ""});
    }
    return space;
}

double sphere_objective(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
}

ParameterSpace rosenbrock_space() {
    return ParameterSpace{{{"x", -2.0, 2.0, ""}, {"y", -2.0, 2.0, ""}}};
}

double rosenbrock_objective(std::span<const double> x) {
    if (x.size() != 2) throw std::invalid_argument("rosenbrock: expected 2 values");
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return -(a * a + 100.0 * b * b);
}

} // namespace painttrap
