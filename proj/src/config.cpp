#include "painttrap/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace painttrap {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& where, const char* key, double fallback) {
    const json* v = find(obj, key);
    return v ? as_number(*v, where + "." + key) : fallback;
}

int int_or(const json& obj, const std::string& where, const char* key, int fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v->get<int>();
}

std::uint64_t u64_or(const json& obj, const std::string& where, const char* key,
                     std::uint64_t fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !v->is_number_integer())
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    return v->get<std::uint64_t>();
}

bool bool_or(const json& obj, const std::string& where, const char* key, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return v->get<bool>();
}

Eigen::Vector3d vec3_or(const json& obj, const std::string& where, const char* key,
                        const Eigen::Vector3d& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    const std::string at = where + "." + key;
    if (!v->is_array() || v->size() != 3) throw ConfigError(at + ": expected [x, y, z]");
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) out[i] = as_number((*v)[static_cast<size_t>(i)], at);
    return out;
}

std::array<double, 2> pair_or(const json& obj, const std::string& where, const char* key,
                              const std::array<double, 2>& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    const std::string at = where + "." + key;
    if (!v->is_array() || v->size() != 2)
        throw ConfigError(at + ": expected a two-element array (one value per beam)");
    return {as_number((*v)[0], at), as_number((*v)[1], at)};
}

template <typename T>
void domain_check(const T& value, const std::string& where) {
    try {
        value.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

PhysicalConstants parse_constants(const json& j) {
    const std::string where = "constants";
    check_keys(j, where,
               {"atom_mass_kg", "scattering_length_m", "dipole_coefficient_J_m2_per_W",
                "lande_gf_abs", "gravity_m_per_s2"});
    PhysicalConstants c;
    c.atom_mass_kg = number_or(j, where, "atom_mass_kg", c.atom_mass_kg);
    c.scattering_length_m = number_or(j, where, "scattering_length_m", c.scattering_length_m);
    c.dipole_coefficient =
        number_or(j, where, "dipole_coefficient_J_m2_per_W", c.dipole_coefficient);
    c.lande_gf_abs = number_or(j, where, "lande_gf_abs", c.lande_gf_abs);
    c.gravity_m_per_s2 = number_or(j, where, "gravity_m_per_s2", c.gravity_m_per_s2);
    domain_check(c, where);
    return c;
}

PaintingSpec parse_painting(const json& j, const std::string& where) {
    check_keys(j, where,
               {"central_freq_Hz", "mod_amplitude_Hz", "painting_freq_Hz", "kappa_m_per_Hz"});
    PaintingSpec p;
    p.central_freq_Hz = number_or(j, where, "central_freq_Hz", p.central_freq_Hz);
    p.mod_amplitude_Hz = number_or(j, where, "mod_amplitude_Hz", p.mod_amplitude_Hz);
    p.painting_freq_Hz = number_or(j, where, "painting_freq_Hz", p.painting_freq_Hz);
    p.kappa_m_per_Hz = number_or(j, where, "kappa_m_per_Hz", p.kappa_m_per_Hz);
    domain_check(p, where);
    return p;
}

BeamLine parse_beamline(const json& j, const std::string& where) {
    check_keys(j, where,
               {"power_W", "waist_x_m", "waist_y_m", "wavelength_m", "axis", "focus_m",
                "paint_axis", "paint_shape", "painting"});
    BeamLine line;
    line.beam.power_W = number_or(j, where, "power_W", 0.0);
    line.beam.waist_x_m = number_or(j, where, "waist_x_m", 0.0);
    line.beam.waist_y_m = number_or(j, where, "waist_y_m", 0.0);
    line.beam.wavelength_m = number_or(j, where, "wavelength_m", line.beam.wavelength_m);
    line.beam.axis = vec3_or(j, where, "axis", line.beam.axis);
    line.beam.focus_m = vec3_or(j, where, "focus_m", line.beam.focus_m);
    line.beam.paint_axis = vec3_or(j, where, "paint_axis", line.beam.paint_axis);
    if (const json* s = find(j, "paint_shape")) {
        if (!s->is_string()) throw ConfigError(where + ".paint_shape: expected a string");
        const std::string v = s->get<std::string>();
        if (v == "uniform")
            line.shape = BeamLine::Shape::uniform;
        else if (v == "parabolic")
            line.shape = BeamLine::Shape::parabolic;
        else
            throw ConfigError(where + ".paint_shape: expected 'uniform' or 'parabolic'");
    }
    if (const json* p = find(j, "painting")) line.painting = parse_painting(*p, where + ".painting");
    domain_check(line.beam, where);
    return line;
}

RampSegment parse_segment(const json& j, const std::string& where) {
    check_keys(j, where,
               {"duration_s", "power_start_W", "power_end_W", "stroke_start_m", "stroke_end_m",
                "gradient_start_Tpm", "gradient_end_Tpm", "jump"});
    RampSegment s;
    s.duration_s = number_or(j, where, "duration_s", 0.0);
    s.power_start_W = pair_or(j, where, "power_start_W", s.power_start_W);
    s.power_end_W = pair_or(j, where, "power_end_W", s.power_end_W);
    s.stroke_start_m = pair_or(j, where, "stroke_start_m", s.stroke_start_m);
    s.stroke_end_m = pair_or(j, where, "stroke_end_m", s.stroke_end_m);
    s.gradient_start_Tpm = number_or(j, where, "gradient_start_Tpm", 0.0);
    s.gradient_end_Tpm = number_or(j, where, "gradient_end_Tpm", 0.0);
    s.jump = bool_or(j, where, "jump", false);
    return s;
}

RampSchedule parse_schedule(const json& j) {
    const std::string where = "schedule";
    check_keys(j, where, {"segments", "hold_s", "rampup_s", "rampup_power_W"});
    RampSchedule s;
    const json* segs = find(j, "segments");
    if (!segs || !segs->is_array() || segs->empty())
        throw ConfigError(where + ".segments: expected a non-empty array");
    for (size_t k = 0; k < segs->size(); ++k)
        s.segments.push_back(
            parse_segment((*segs)[k], where + ".segments[" + std::to_string(k) + "]"));
    s.hold_s = number_or(j, where, "hold_s", 0.0);
    s.rampup_s = number_or(j, where, "rampup_s", 0.0);
    s.rampup_power_W = pair_or(j, where, "rampup_power_W", s.rampup_power_W);
    domain_check(s, where);
    return s;
}

MolassesParams parse_molasses(const json& j) {
    const std::string where = "molasses";
    check_keys(j, where, {"atoms", "temperature_K", "radius_m"});
    MolassesParams m;
    m.atoms = number_or(j, where, "atoms", 0.0);
    m.temperature_K = number_or(j, where, "temperature_K", 1e-6);
    m.radius_m = number_or(j, where, "radius_m", 1e-4);
    domain_check(m, where);
    return m;
}

EvapModel parse_model(const json& j) {
    const std::string where = "model";
    check_keys(j, where,
               {"tau_bg_s", "collision_prefactor", "loss_coefficient", "energy_offset",
                "l3_m6_per_s"});
    EvapModel m;
    m.tau_bg_s = number_or(j, where, "tau_bg_s", m.tau_bg_s);
    m.collision_prefactor = number_or(j, where, "collision_prefactor", m.collision_prefactor);
    m.loss_coefficient = number_or(j, where, "loss_coefficient", m.loss_coefficient);
    m.energy_offset = number_or(j, where, "energy_offset", m.energy_offset);
    m.l3_m6_per_s = number_or(j, where, "l3_m6_per_s", m.l3_m6_per_s);
    if (m.tau_bg_s <= 0.0 || m.collision_prefactor < 0.0 || m.loss_coefficient < 0.0 ||
        m.l3_m6_per_s < 0.0)
        throw ConfigError(where + ": coefficients out of range");
    return m;
}

SimOptions parse_sim(const json& j) {
    const std::string where = "simulation";
    check_keys(j, where, {"dt_s", "recharacterize_every_s"});
    SimOptions s;
    s.dt_s = number_or(j, where, "dt_s", s.dt_s);
    s.recharacterize_every_s =
        number_or(j, where, "recharacterize_every_s", s.recharacterize_every_s);
    if (s.dt_s <= 0.0 || s.recharacterize_every_s < s.dt_s)
        throw ConfigError(where + ": need 0 < dt_s <= recharacterize_every_s");
    return s;
}

OptimizerSettings parse_optimizer(const json& j, std::uint64_t top_seed) {
    const std::string where = "optimizer";
    check_keys(j, where,
               {"population", "weight", "crossover", "generations", "seed", "threads",
                "stage1_generations"});
    OptimizerSettings o;
    o.de.population = int_or(j, where, "population", o.de.population);
    o.de.weight = number_or(j, where, "weight", o.de.weight);
    o.de.crossover = number_or(j, where, "crossover", o.de.crossover);
    o.de.generations = int_or(j, where, "generations", o.de.generations);
    o.de.seed = u64_or(j, where, "seed", top_seed);
    o.de.threads = int_or(j, where, "threads", o.de.threads);
    o.stage1_generations = int_or(j, where, "stage1_generations", o.stage1_generations);
    try {
        o.de.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + std::string(e.what()));
    }
    if (o.stage1_generations < 0)
        throw ConfigError(where + ".stage1_generations: must be >= 0");
    return o;
}

Overheads parse_overheads(const json& j) {
    const std::string where = "overheads";
    check_keys(j, where, {"mot_s", "molasses_s", "detection_s"});
    Overheads o;
    o.mot_s = number_or(j, where, "mot_s", 0.0);
    o.molasses_s = number_or(j, where, "molasses_s", 0.0);
    o.detection_s = number_or(j, where, "detection_s", 0.0);
    if (o.mot_s < 0.0 || o.molasses_s < 0.0 || o.detection_s < 0.0)
        throw ConfigError(where + ": overheads must be non-negative");
    return o;
}

PaintScenario parse_paint(const json& j) {
    const std::string where = "paint";
    check_keys(j, where,
               {"waist_m", "power_W", "kappa_m_per_Hz", "central_freq_Hz", "stroke_m",
                "painting_freqs_Hz", "sample_rate_Hz", "n_periods", "profile_points"});
    PaintScenario p;
    p.waist_m = number_or(j, where, "waist_m", p.waist_m);
    p.power_W = number_or(j, where, "power_W", p.power_W);
    p.kappa_m_per_Hz = number_or(j, where, "kappa_m_per_Hz", p.kappa_m_per_Hz);
    p.central_freq_Hz = number_or(j, where, "central_freq_Hz", p.central_freq_Hz);
    p.stroke_m = number_or(j, where, "stroke_m", p.stroke_m);
    if (const json* v = find(j, "painting_freqs_Hz")) {
        if (!v->is_array()) throw ConfigError(where + ".painting_freqs_Hz: expected an array");
        p.painting_freqs_Hz.clear();
        for (const json& f : *v)
            p.painting_freqs_Hz.push_back(as_number(f, where + ".painting_freqs_Hz"));
    }
    p.sample_rate_Hz = number_or(j, where, "sample_rate_Hz", p.sample_rate_Hz);
    p.n_periods = int_or(j, where, "n_periods", p.n_periods);
    p.profile_points = int_or(j, where, "profile_points", p.profile_points);
    domain_check(p, where);
    return p;
}

WaveformExport parse_waveform(const json& j) {
    const std::string where = "waveform";
    check_keys(j, where, {"beam_index", "sample_rate_Hz", "n_periods", "cells"});
    WaveformExport w;
    w.beam_index = int_or(j, where, "beam_index", w.beam_index);
    w.sample_rate_Hz = number_or(j, where, "sample_rate_Hz", w.sample_rate_Hz);
    w.n_periods = int_or(j, where, "n_periods", w.n_periods);
    w.cells = int_or(j, where, "cells", w.cells);
    domain_check(w, where);
    return w;
}

ordered_json painting_json(const PaintingSpec& p) {
    return {{"central_freq_Hz", p.central_freq_Hz},
            {"mod_amplitude_Hz", p.mod_amplitude_Hz},
            {"painting_freq_Hz", p.painting_freq_Hz},
            {"kappa_m_per_Hz", p.kappa_m_per_Hz}};
}

ordered_json vec3_json(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

ordered_json beamline_json(const BeamLine& b) {
    return {{"power_W", b.beam.power_W},
            {"waist_x_m", b.beam.waist_x_m},
            {"waist_y_m", b.beam.waist_y_m},
            {"wavelength_m", b.beam.wavelength_m},
            {"axis", vec3_json(b.beam.axis)},
            {"focus_m", vec3_json(b.beam.focus_m)},
            {"paint_axis", vec3_json(b.beam.paint_axis)},
            {"paint_shape", b.shape == BeamLine::Shape::uniform ? "uniform" : "parabolic"},
            {"painting", painting_json(b.painting)}};
}

ordered_json segment_json(const RampSegment& s) {
    return {{"duration_s", s.duration_s},
            {"power_start_W", {s.power_start_W[0], s.power_start_W[1]}},
            {"power_end_W", {s.power_end_W[0], s.power_end_W[1]}},
            {"stroke_start_m", {s.stroke_start_m[0], s.stroke_start_m[1]}},
            {"stroke_end_m", {s.stroke_end_m[0], s.stroke_end_m[1]}},
            {"gradient_start_Tpm", s.gradient_start_Tpm},
            {"gradient_end_Tpm", s.gradient_end_Tpm},
            {"jump", s.jump}};
}

} // namespace

void PaintScenario::validate() const {
    if (waist_m <= 0.0) throw ConfigError("paint.waist_m: must be positive");
    if (power_W < 0.0) throw ConfigError("paint.power_W: must be non-negative");
    if (kappa_m_per_Hz <= 0.0) throw ConfigError("paint.kappa_m_per_Hz: must be positive");
    if (central_freq_Hz <= 0.0) throw ConfigError("paint.central_freq_Hz: must be positive");
    if (stroke_m <= 0.0) throw ConfigError("paint.stroke_m: must be positive");
    if (painting_freqs_Hz.empty())
        throw ConfigError("paint.painting_freqs_Hz: expected at least one case");
    for (double f : painting_freqs_Hz) {
        if (f < 0.0) throw ConfigError("paint.painting_freqs_Hz: must be non-negative");
        if (f > 0.0 && sample_rate_Hz < 100.0 * f)
            throw ConfigError("paint.sample_rate_Hz: must be >= 100x each painting frequency");
    }
    if (sample_rate_Hz <= 0.0) throw ConfigError("paint.sample_rate_Hz: must be positive");
    if (n_periods < 1) throw ConfigError("paint.n_periods: must be >= 1");
    if (profile_points < 3) throw ConfigError("paint.profile_points: must be >= 3");
}

void WaveformExport::validate() const {
    if (beam_index < 0 || beam_index > 1)
        throw ConfigError("waveform.beam_index: must be 0 or 1");
    if (sample_rate_Hz <= 0.0) throw ConfigError("waveform.sample_rate_Hz: must be positive");
    if (n_periods < 1) throw ConfigError("waveform.n_periods: must be >= 1");
    if (cells < 1) throw ConfigError("waveform.cells: must be >= 1");
}

TrapSetup RunConfig::setup() const {
    TrapSetup s;
    s.lines = lines;
    s.gravity = gravity;
    s.constants = constants;
    return s;
}

SimContext RunConfig::context() const {
    SimContext c;
    c.setup = setup();
    c.schedule = schedule;
    c.molasses = molasses;
    c.sim = sim;
    c.model = model;
    return c;
}

RunConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"constants", "gravity", "beams", "schedule", "molasses", "model", "simulation",
                "optimizer", "overheads", "seed", "paint", "waveform"});
    RunConfig cfg;
    if (const json* v = find(j, "constants")) cfg.constants = parse_constants(*v);
    cfg.gravity = bool_or(j, "config", "gravity", cfg.gravity);

    const json* beams = find(j, "beams");
    if (!beams) throw ConfigError("config: missing required key 'beams'");
    if (!beams->is_array() || beams->size() != 2)
        throw ConfigError("beams: expected an array of exactly two beams");
    cfg.lines[0] = parse_beamline((*beams)[0], "beams[0]");
    cfg.lines[1] = parse_beamline((*beams)[1], "beams[1]");

    const json* sched = find(j, "schedule");
    if (!sched) throw ConfigError("config: missing required key 'schedule'");
    cfg.schedule = parse_schedule(*sched);

    if (const json* v = find(j, "molasses")) cfg.molasses = parse_molasses(*v);
    if (const json* v = find(j, "model")) cfg.model = parse_model(*v);
    if (const json* v = find(j, "simulation")) cfg.sim = parse_sim(*v);
    cfg.seed = u64_or(j, "config", "seed", cfg.seed);
    if (const json* v = find(j, "optimizer"))
        cfg.optimizer = parse_optimizer(*v, cfg.seed);
    else
        cfg.optimizer.de.seed = cfg.seed;
    if (const json* v = find(j, "overheads")) cfg.overheads = parse_overheads(*v);
    if (const json* v = find(j, "paint")) cfg.paint = parse_paint(*v);
    if (const json* v = find(j, "waveform")) cfg.waveform = parse_waveform(*v);
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON syntax error: ") + e.what());
    }
    return parse_config(j);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("config: read failed for '" + path + "'");
    return parse_config_text(text);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    ordered_json j;
    j["constants"] = {{"atom_mass_kg", cfg.constants.atom_mass_kg},
                      {"scattering_length_m", cfg.constants.scattering_length_m},
                      {"dipole_coefficient_J_m2_per_W", cfg.constants.dipole_coefficient},
                      {"lande_gf_abs", cfg.constants.lande_gf_abs},
                      {"gravity_m_per_s2", cfg.constants.gravity_m_per_s2}};
    j["gravity"] = cfg.gravity;
    j["beams"] = {beamline_json(cfg.lines[0]), beamline_json(cfg.lines[1])};
    ordered_json segs = ordered_json::array();
    for (const RampSegment& s : cfg.schedule.segments) segs.push_back(segment_json(s));
    j["schedule"] = {{"segments", std::move(segs)},
                     {"hold_s", cfg.schedule.hold_s},
                     {"rampup_s", cfg.schedule.rampup_s},
                     {"rampup_power_W",
                      {cfg.schedule.rampup_power_W[0], cfg.schedule.rampup_power_W[1]}}};
    j["molasses"] = {{"atoms", cfg.molasses.atoms},
                     {"temperature_K", cfg.molasses.temperature_K},
                     {"radius_m", cfg.molasses.radius_m}};
    j["model"] = {{"tau_bg_s", cfg.model.tau_bg_s},
                  {"collision_prefactor", cfg.model.collision_prefactor},
                  {"loss_coefficient", cfg.model.loss_coefficient},
                  {"energy_offset", cfg.model.energy_offset},
                  {"l3_m6_per_s", cfg.model.l3_m6_per_s}};
    j["simulation"] = {{"dt_s", cfg.sim.dt_s},
                       {"recharacterize_every_s", cfg.sim.recharacterize_every_s}};
    j["optimizer"] = {{"population", cfg.optimizer.de.population},
                      {"weight", cfg.optimizer.de.weight},
                      {"crossover", cfg.optimizer.de.crossover},
                      {"generations", cfg.optimizer.de.generations},
                      {"seed", cfg.optimizer.de.seed},
                      {"threads", cfg.optimizer.de.threads},
                      {"stage1_generations", cfg.optimizer.stage1_generations}};
    j["overheads"] = {{"mot_s", cfg.overheads.mot_s},
                      {"molasses_s", cfg.overheads.molasses_s},
                      {"detection_s", cfg.overheads.detection_s}};
    j["seed"] = cfg.seed;
    if (cfg.paint) {
        j["paint"] = {{"waist_m", cfg.paint->waist_m},
                      {"power_W", cfg.paint->power_W},
                      {"kappa_m_per_Hz", cfg.paint->kappa_m_per_Hz},
                      {"central_freq_Hz", cfg.paint->central_freq_Hz},
                      {"stroke_m", cfg.paint->stroke_m},
                      {"painting_freqs_Hz", cfg.paint->painting_freqs_Hz},
                      {"sample_rate_Hz", cfg.paint->sample_rate_Hz},
                      {"n_periods", cfg.paint->n_periods},
                      {"profile_points", cfg.paint->profile_points}};
    }
    if (cfg.waveform) {
        j["waveform"] = {{"beam_index", cfg.waveform->beam_index},
                         {"sample_rate_Hz", cfg.waveform->sample_rate_Hz},
                         {"n_periods", cfg.waveform->n_periods},
                         {"cells", cfg.waveform->cells}};
    }
    return j;
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("config: cannot write '" + path + "'");
    out << to_json(cfg).dump(2) << '\n';
    if (!out) throw IoError("config: write failed for '" + path + "'");
}

} // namespace painttrap
