#ifndef PAINTTRAP_CONFIG_HPP
#define PAINTTRAP_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "painttrap/errors.hpp"
#include "painttrap/optimizer.hpp"

namespace painttrap {

// Painting-frequency scan (spectra, painted profiles, corrugation) for a
// single beam; painting_freqs_Hz may include 0 for the static reference.
struct PaintScenario {
    double waist_m = 5e-6;
    double power_W = 0.5;
    double kappa_m_per_Hz = 1e-11;
    double central_freq_Hz = 80e6;
    double stroke_m = 5e-5;
    std::vector<double> painting_freqs_Hz;
    double sample_rate_Hz = 2.56e8;
    int n_periods = 8;
    int profile_points = 401;

    void validate() const;
};

// AOD drive export settings for one of the configured beams.
struct WaveformExport {
    int beam_index = 0;
    double sample_rate_Hz = 0.0;
    int n_periods = 1;
    int cells = 256;

    void validate() const;
};

struct OptimizerSettings {
    DeConfig de;
    int stage1_generations = 20; // stage-1 budget; stage 2 uses de.generations
};

// Complete experiment description, loaded from a single JSON file.
// Dimensioned keys carry unit suffixes; unknown keys are rejected.
struct RunConfig {
    PhysicalConstants constants;
    bool gravity = true;
    std::array<BeamLine, 2> lines;
    RampSchedule schedule;
    MolassesParams molasses;
    EvapModel model;
    SimOptions sim;
    OptimizerSettings optimizer;
    Overheads overheads;
    std::uint64_t seed = 1;
    std::optional<PaintScenario> paint;
    std::optional<WaveformExport> waveform;

    TrapSetup setup() const;
    SimContext context() const;
};

// Throws ConfigError for syntax errors, unknown keys, type mismatches, or
// values failing the domain validations.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path); // IoError on I/O failure

// Full-schema emission; parse(emit(cfg)) reproduces cfg and re-emits
// byte-identically (stable key order, round-trip number formatting).
nlohmann::ordered_json to_json(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

} // namespace painttrap

#endif
