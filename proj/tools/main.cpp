#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "painttrap/config.hpp"
#include "painttrap/constants.hpp"
#include "painttrap/evaporation.hpp"
#include "painttrap/optimizer.hpp"
#include "painttrap/painting.hpp"
#include "painttrap/trap.hpp"

namespace fs = std::filesystem;
using namespace painttrap;

namespace {

std::ofstream open_text(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool strict = false;
    double at_s = 0.0;
    int stage = 0; // 0: both stages
    std::string benchmark;
    int expect_params = 0;
    std::string format = "csv";
};

RunConfig load(const Options& opt) {
    if (opt.config_path.empty()) throw ConfigError("no --config given");
    RunConfig cfg = load_config(opt.config_path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.optimizer.de.seed = *opt.seed;
    }
    return cfg;
}

// ---- paint -----------------------------------------------------------------

int cmd_paint(const Options& opt) {
    const RunConfig cfg = load(opt);
    if (!cfg.paint) throw ConfigError("paint: config has no 'paint' section");
    const PaintScenario& sc = *cfg.paint;
    const fs::path out = ensure_out_dir(opt.out_dir);

    Beam beam;
    beam.power_W = sc.power_W;
    beam.waist_x_m = sc.waist_m;
    beam.waist_y_m = sc.waist_m;
    beam.axis = Eigen::Vector3d::UnitY();
    beam.paint_axis = Eigen::Vector3d::UnitX();
    beam.validate();

    const fs::path corr_path = out / "corrugation.csv";
    std::ofstream corr = open_text(corr_path);
    corr << "painting_freq_Hz,well_spacing_m,corrugation\n";

    char buf[256];
    const double span = sc.stroke_m + 3.0 * sc.waist_m;
    std::vector<double> grid(static_cast<size_t>(sc.profile_points));
    for (int i = 0; i < sc.profile_points; ++i)
        grid[static_cast<size_t>(i)] = -span + 2.0 * span * i / (sc.profile_points - 1);

    for (size_t c = 0; c < sc.painting_freqs_Hz.size(); ++c) {
        const double fp = sc.painting_freqs_Hz[c];
        const bool painted = fp > 0.0;

        PaintingSpec spec;
        spec.central_freq_Hz = sc.central_freq_Hz;
        spec.kappa_m_per_Hz = sc.kappa_m_per_Hz;
        spec.painting_freq_Hz = fp;
        spec.mod_amplitude_Hz = painted ? sc.stroke_m / sc.kappa_m_per_Hz : 0.0;

        // RF spectrum of the drive for this case.
        Waveform w;
        if (painted) {
            const DwellDensity dwell = DwellDensity::uniform(sc.stroke_m, 256);
            w = frequency_trajectory(dwell, spec, sc.sample_rate_Hz);
        } else {
            const int n = 2048;
            w = constant_waveform(sc.central_freq_Hz, sc.sample_rate_Hz, n);
        }
        const Spectrum spectrum = rf_spectrum(w, painted ? sc.n_periods : 1);

        const fs::path spath = out / ("spectrum_case" + std::to_string(c) + ".csv");
        std::ofstream sf = open_text(spath);
        sf << "freq_Hz,amplitude\n";
        for (size_t i = 0; i < spectrum.freq_Hz.size(); ++i) {
            if (spectrum.amplitude[i] < 1e-9) continue; // keep files compact
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", spectrum.freq_Hz[i],
                          spectrum.amplitude[i]);
            sf << buf;
        }
        finish(sf, spath);

        // Painted 1-D profile from the sideband comb model.
        std::vector<double> profile;
        if (painted) {
            profile = comb_profile(spec, sc.waist_m, grid);
        } else {
            profile.resize(grid.size());
            for (size_t i = 0; i < grid.size(); ++i) {
                const double u = grid[i] / sc.waist_m;
                profile[i] = std::exp(-2.0 * u * u);
            }
        }
        const double peak = *std::max_element(profile.begin(), profile.end());
        const fs::path ppath = out / ("profile_case" + std::to_string(c) + ".csv");
        std::ofstream pf = open_text(ppath);
        pf << "x_m,intensity_rel\n";
        for (size_t i = 0; i < grid.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", grid[i],
                          peak > 0.0 ? profile[i] / peak : 0.0);
            pf << buf;
        }
        finish(pf, ppath);

        // 2-D time-averaged intensity in the focal plane (paint axis x
        // transverse axis); this is the ideal continuous average.
        const DwellDensity dwell =
            painted ? DwellDensity::uniform(sc.stroke_m, 256) : DwellDensity::delta();
        const fs::path mpath = out / ("map_case" + std::to_string(c) + ".csv");
        std::ofstream mf = open_text(mpath);
        mf << "x_m,y_m,intensity_W_m2\n";
        const int nx = 81, ny = 41;
        for (int iy = 0; iy < ny; ++iy) {
            const double y = -3.0 * sc.waist_m + 6.0 * sc.waist_m * iy / (ny - 1);
            for (int ix = 0; ix < nx; ++ix) {
                const double x = -span + 2.0 * span * ix / (nx - 1);
                const double v = time_averaged_intensity(beam, dwell, {x, 0.0, y});
                std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", x, y, v);
                mf << buf;
            }
        }
        finish(mf, mpath);

        double spacing = 0.0, corrugation = 0.0;
        if (painted) {
            const Fragmentation frag = sideband_fragmentation(spec, sc.waist_m);
            spacing = frag.well_spacing_m;
            corrugation = frag.corrugation;
        }
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", fp, spacing, corrugation);
        corr << buf;
        std::printf("case %zu: f_p = %g Hz, well spacing %g m, corrugation %.4f\n", c, fp,
                    spacing, corrugation);
    }
    finish(corr, corr_path);
    return 0;
}

// ---- trap ------------------------------------------------------------------

int cmd_trap(const Options& opt) {
    const RunConfig cfg = load(opt);
    const Controls controls = interpolate_controls(cfg.schedule, opt.at_s);
    const TrapConfig trap_cfg = make_trap_config(cfg.setup(), controls);

    TrapCharacterization ch;
    bool trapped = true;
    std::string reason;
    try {
        ch = characterize_trap(trap_cfg, Eigen::Vector3d::Zero());
    } catch (const PhysicsError& e) {
        trapped = false;
        reason = e.what();
    }

    std::printf("t = %g s: P = (%g, %g) W, stroke = (%g, %g) m, Bp = %g T/m\n", opt.at_s,
                controls.power_W[0], controls.power_W[1], controls.stroke_m[0],
                controls.stroke_m[1], controls.gradient_Tpm);
    if (trapped) {
        std::printf("minimum (m): %.4g %.4g %.4g\n", ch.minimum[0], ch.minimum[1], ch.minimum[2]);
        std::printf("frequencies (Hz): fx = %.4g, fy = %.4g, fz = %.4g (mean %.4g)\n",
                    ch.freq_Hz[0], ch.freq_Hz[1], ch.freq_Hz[2],
                    ch.mean_angular_freq / (2.0 * std::numbers::pi));
        for (SpinState s : all_spins)
            std::printf("depth m_F=%+d: %.6g uK\n", static_cast<int>(s),
                        ch.depth(s) / k_boltzmann * 1e6);
        for (size_t b = 0; b < cfg.lines.size(); ++b) {
            const BeamLine& line = cfg.lines[b];
            PaintingSpec spec = line.painting;
            spec.mod_amplitude_Hz = controls.stroke_m[b] / spec.kappa_m_per_Hz;
            const PaintingCheck check =
                validate_painting(spec, std::min(line.beam.waist_x_m, line.beam.waist_y_m),
                                  ch.freq_Hz);
            for (const std::string& wmsg : check.warnings)
                std::printf("warning: %s\n", wmsg.c_str());
        }
    } else {
        std::printf("untrapped: %s\n", reason.c_str());
    }

    const fs::path out = ensure_out_dir(opt.out_dir);
    const fs::path tpath = out / "trap.csv";
    std::ofstream tf = open_text(tpath);
    tf << "t_s,x_m,y_m,z_m,fx_Hz,fy_Hz,fz_Hz,depth_m1_uK,depth_0_uK,depth_p1_uK\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  opt.at_s, ch.minimum[0], ch.minimum[1], ch.minimum[2], ch.freq_Hz[0],
                  ch.freq_Hz[1], ch.freq_Hz[2], ch.depth_J[0] / k_boltzmann * 1e6,
                  ch.depth_J[1] / k_boltzmann * 1e6, ch.depth_J[2] / k_boltzmann * 1e6);
    tf << buf;
    finish(tf, tpath);

    if (!trapped && opt.strict) {
        std::fprintf(stderr, "error: %s\n", reason.c_str());
        return 2;
    }
    return 0;
}

// ---- evap ------------------------------------------------------------------

void write_summary(const fs::path& path, const Trajectory& traj, const RunConfig& cfg,
                   bool failed, double t_fail) {
    const TrajectoryPoint& end = traj.points.back();
    nlohmann::ordered_json j;
    j["final"] = {{"t_s", end.t_s},
                  {"N_m1", end.state.number[0]},
                  {"N_0", end.state.number[1]},
                  {"N_p1", end.state.number[2]},
                  {"N_total", end.state.total()},
                  {"T_K", end.state.temperature_K},
                  {"psd", end.psd},
                  {"condensate_fraction", end.condensate_fraction},
                  {"condensed_atoms", end.state.total() * end.condensate_fraction}};
    j["cycle_time_s"] = cycle_time(cfg.schedule, cfg.overheads);
    if (failed) j["failed_at_s"] = t_fail;
    std::ofstream out = open_text(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

int cmd_evap(const Options& opt) {
    const RunConfig cfg = load(opt);
    const fs::path out = ensure_out_dir(opt.out_dir);

    const Controls start = interpolate_controls(cfg.schedule, 0.0);
    const CloudState initial = load_from_molasses(cfg.setup(), start, cfg.molasses);
    std::printf("loaded %.4g atoms at %.4g uK\n", initial.total(),
                initial.temperature_K * 1e6);

    Trajectory traj;
    bool failed = false;
    double t_fail = 0.0;
    std::string reason;
    try {
        traj = run_schedule(cfg.setup(), cfg.schedule, initial, cfg.sim, cfg.model);
    } catch (const ScheduleError& e) {
        traj = e.partial;
        failed = true;
        t_fail = e.t_fail_s;
        reason = e.what();
    }

    const fs::path tpath = out / "trajectory.csv";
    std::ofstream tf = open_text(tpath);
    write_trajectory_csv(traj, tf);
    finish(tf, tpath);

    if (traj.points.empty()) {
        std::fprintf(stderr, "error: schedule produced no trajectory (%s)\n", reason.c_str());
        return 2;
    }
    write_summary(out / "summary.json", traj, cfg, failed, t_fail);

    const TrajectoryPoint& end = traj.points.back();
    std::printf("final: N = (%.4g, %.4g, %.4g), T = %.4g K, PSD = %.4g, "
                "condensate fraction %.3f\n",
                end.state.number[0], end.state.number[1], end.state.number[2],
                end.state.temperature_K, end.psd, end.condensate_fraction);
    std::printf("cycle time: %.6g s\n", cycle_time(cfg.schedule, cfg.overheads));
    if (failed) {
        std::fprintf(stderr, "physics failure at t = %g s: %s\n", t_fail, reason.c_str());
        if (opt.strict) return 2;
    }
    return 0;
}

// ---- optimize --------------------------------------------------------------

void write_record(const fs::path& path, const RunRecord& record) {
    std::ofstream out = open_text(path);
    write_runrecord_csv(record, out);
    finish(out, path);
}

int cmd_optimize(const Options& opt) {
    const RunConfig cfg = load(opt);
    const fs::path out = ensure_out_dir(opt.out_dir);

    if (!opt.benchmark.empty()) {
        ParameterSpace space;
        Objective objective;
        DeConfig de = cfg.optimizer.de;
        if (opt.benchmark == "sphere") {
            space = sphere_space(10);
            objective = [](std::span<const double> x) { return sphere_objective(x); };
            de.generations = 400; // documented budget for the 10-D sphere
        } else if (opt.benchmark == "rosenbrock") {
            space = rosenbrock_space();
            objective = [](std::span<const double> x) { return rosenbrock_objective(x); };
            de.generations = 500; // documented budget for 2-D Rosenbrock
        } else {
            throw ConfigError("optimize: unknown benchmark '" + opt.benchmark + "'");
        }
        const DeResult r = de_optimize(objective, space, de);
        write_record(out / "runrecord_benchmark.csv", r.record);
        std::printf("benchmark %s: best value %.10g at (", opt.benchmark.c_str(), r.best_value);
        for (size_t i = 0; i < r.best_params.size(); ++i)
            std::printf("%s%.6g", i ? ", " : "", r.best_params[i]);
        std::printf(")\n");
        return 0;
    }

    const SimContext ctx = cfg.context();
    RunConfig best_cfg = cfg;

    if (opt.stage == 1) {
        const ParameterSpace space = stage1_space();
        if (opt.expect_params && static_cast<size_t>(opt.expect_params) != space.size())
            throw ConfigError("optimize: stage-1 space has " + std::to_string(space.size()) +
                              " parameters");
        DeConfig de = cfg.optimizer.de;
        de.generations = cfg.optimizer.stage1_generations;
        const Objective objective = [&ctx](std::span<const double> p) {
            const Stage1Result r = decode_stage1(p, ctx.schedule);
            SimContext local = ctx;
            local.molasses = r.molasses;
            return simulate_condensed_atoms(local, apply_stage1(ctx.schedule, r));
        };
        const DeResult r = de_optimize(objective, space, de);
        write_record(out / "runrecord_stage1.csv", r.record);
        const Stage1Result best = decode_stage1(r.best_params, ctx.schedule);
        best_cfg.molasses = best.molasses;
        best_cfg.schedule = apply_stage1(ctx.schedule, best);
        save_config(best_cfg, (out / "best_config.json").string());
        std::printf("stage 1 best objective: %.10g condensed atoms\n", r.best_value);
    } else if (opt.stage == 2) {
        const ParameterSpace space = stage2_space(ctx.schedule);
        if (opt.expect_params && static_cast<size_t>(opt.expect_params) != space.size())
            throw ConfigError("optimize: stage-2 space has " + std::to_string(space.size()) +
                              " parameters");
        const Objective objective = [&ctx](std::span<const double> p) {
            return simulate_condensed_atoms(ctx, decode_stage2(ctx.schedule, p));
        };
        const DeResult r = de_optimize(objective, space, cfg.optimizer.de);
        write_record(out / "runrecord_stage2.csv", r.record);
        best_cfg.schedule = decode_stage2(ctx.schedule, r.best_params);
        save_config(best_cfg, (out / "best_config.json").string());
        std::printf("stage 2 best objective: %.10g condensed atoms\n", r.best_value);
    } else {
        DeConfig de1 = cfg.optimizer.de;
        de1.generations = cfg.optimizer.stage1_generations;
        const TwoStageResult r = two_stage_optimize(ctx, de1, cfg.optimizer.de);
        write_record(out / "runrecord_stage1.csv", r.stage1.record);
        write_record(out / "runrecord_stage2.csv", r.stage2.record);
        best_cfg.molasses = r.molasses;
        best_cfg.schedule = r.best_schedule;
        save_config(best_cfg, (out / "best_config.json").string());
        std::printf("stage 1 best objective: %.10g\n", r.stage1.best_value);
        std::printf("stage 2 best objective: %.10g condensed atoms\n", r.stage2.best_value);
    }
    return 0;
}

// ---- export-waveform -------------------------------------------------------

int cmd_export_waveform(const Options& opt) {
    const RunConfig cfg = load(opt);
    if (!cfg.waveform) throw ConfigError("export-waveform: config has no 'waveform' section");
    const WaveformExport& we = *cfg.waveform;
    const BeamLine& line = cfg.lines[static_cast<size_t>(we.beam_index)];
    const PaintingSpec& spec = line.painting;
    const fs::path out = ensure_out_dir(opt.out_dir);

    Waveform w;
    if (spec.stroke_m() > 0.0 && spec.painting_freq_Hz > 0.0) {
        const PaintProfile profile = line.shape == BeamLine::Shape::uniform
                                         ? PaintProfile::uniform(spec.stroke_m())
                                         : PaintProfile::parabolic(spec.stroke_m());
        w = frequency_trajectory(profile.to_density(we.cells), spec, we.sample_rate_Hz);
    } else {
        const int n = std::max(
            1, spec.painting_freq_Hz > 0.0
                   ? static_cast<int>(std::lround(we.sample_rate_Hz / spec.painting_freq_Hz))
                   : 1024);
        w = constant_waveform(spec.central_freq_Hz, we.sample_rate_Hz, n);
    }

    if (opt.format == "csv") {
        const fs::path path = out / "waveform.csv";
        std::ofstream f = open_text(path);
        f << "t_s,f_Hz,phase_rad\n";
        char buf[128];
        for (int i = 0; i < w.samples_per_period(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", i / w.sample_rate_Hz,
                          w.freq_Hz[static_cast<size_t>(i)], w.phase_rad[static_cast<size_t>(i)]);
            f << buf;
        }
        finish(f, path);
        std::printf("wrote %s (%d samples per period)\n", path.string().c_str(),
                    w.samples_per_period());
    } else if (opt.format == "iq") {
        const fs::path path = out / "waveform.iq";
        std::ofstream f = open_text(path);
        const std::vector<std::complex<double>> signal = waveform_signal(w, we.n_periods);
        std::vector<float> samples;
        samples.reserve(2 * signal.size());
        for (const std::complex<double>& z : signal) {
            samples.push_back(static_cast<float>(z.real()));
            samples.push_back(static_cast<float>(z.imag()));
        }
        f.write(reinterpret_cast<const char*>(samples.data()),
                static_cast<std::streamsize>(samples.size() * sizeof(float)));
        finish(f, path);
        std::printf("wrote %s (%zu bytes)\n", path.string().c_str(),
                    samples.size() * sizeof(float));
    } else {
        throw ConfigError("export-waveform: unsupported format '" + opt.format + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Painted optical dipole trap: waveforms, traps, evaporation, optimization"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    app.add_option("--config", opt.config_path, "JSON experiment description");
    app.add_option("--out", opt.out_dir, "output directory (default .)");
    app.add_flag("--strict", opt.strict, "exit 2 on physics failures");

    CLI::App* paint = app.add_subcommand("paint", "painting-frequency scan: spectra & profiles");
    CLI::App* trap = app.add_subcommand("trap", "characterize the trap at one instant");
    trap->add_option("--at", opt.at_s, "schedule time in seconds (default 0)");
    CLI::App* evap = app.add_subcommand("evap", "simulate the evaporation schedule");
    CLI::App* optimize = app.add_subcommand("optimize", "differential-evolution ramp search");
    optimize->add_option("--stage", opt.stage, "run only stage 1 or 2 (default: both)")
        ->check(CLI::IsMember({1, 2}));
    optimize->add_option("--benchmark", opt.benchmark, "analytic objective (sphere, rosenbrock)");
    optimize->add_option("--params", opt.expect_params, "expected parameter-space size");
    CLI::App* exportwf = app.add_subcommand("export-waveform", "emit the AOD drive signal");
    exportwf->add_option("--format", opt.format, "csv or iq")
        ->check(CLI::IsMember({"csv", "iq"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (seed_opt->count() > 0) opt.seed = seed_value;

    try {
        if (paint->parsed()) return cmd_paint(opt);
        if (trap->parsed()) return cmd_trap(opt);
        if (evap->parsed()) return cmd_evap(opt);
        if (optimize->parsed()) return cmd_optimize(opt);
        if (exportwf->parsed()) return cmd_export_waveform(opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const PhysicsError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return opt.strict ? 2 : 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
