#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "painttrap/config.hpp"

using namespace painttrap;

namespace {

std::string config_dir() { return PAINTTRAP_CONFIG_DIR; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("the shipped production scenario parses to the documented values") {
    const RunConfig cfg = load_config(config_dir() + "/production.json");

    CHECK(cfg.lines[0].beam.power_W == doctest::Approx(20.0)); // schedule start point
    CHECK(cfg.lines[0].beam.waist_x_m == doctest::Approx(35e-6).epsilon(1e-12));
    CHECK(cfg.lines[1].beam.waist_x_m == doctest::Approx(5e-6).epsilon(1e-12));
    CHECK(cfg.lines[0].beam.wavelength_m == doctest::Approx(1064e-9).epsilon(1e-12));
    CHECK(cfg.lines[0].painting.kappa_m_per_Hz == doctest::Approx(5e-11).epsilon(1e-12));
    CHECK(cfg.lines[1].painting.kappa_m_per_Hz == doctest::Approx(1e-11).epsilon(1e-12));
    CHECK(cfg.lines[0].painting.painting_freq_Hz == doctest::Approx(100e3).epsilon(1e-12));
    CHECK(cfg.lines[1].painting.painting_freq_Hz == doctest::Approx(90e3).epsilon(1e-12));
    CHECK(cfg.lines[0].shape == BeamLine::Shape::parabolic);

    REQUIRE(cfg.schedule.segments.size() == 6);
    CHECK(cfg.schedule.segments[0].power_start_W[0] == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(cfg.schedule.segments[0].stroke_start_m[0] == doctest::Approx(1.1e-3).epsilon(1e-12));
    CHECK(cfg.schedule.segments[0].gradient_start_Tpm == doctest::Approx(0.67).epsilon(1e-12));
    CHECK(cfg.schedule.segments[5].power_end_W[1] == doctest::Approx(5e-3).epsilon(1e-12));
    CHECK(cfg.schedule.segments[5].stroke_end_m[1] == doctest::Approx(1.58e-5).epsilon(1e-12));
    CHECK(cfg.schedule.hold_s == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(cfg.schedule.rampup_s == doctest::Approx(0.03).epsilon(1e-12));

    CHECK(cfg.molasses.atoms == doctest::Approx(4e9).epsilon(1e-12));
    CHECK(cfg.molasses.temperature_K == doctest::Approx(13e-6).epsilon(1e-12));
    CHECK(cfg.overheads.mot_s == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(cfg.overheads.molasses_s == doctest::Approx(0.031).epsilon(1e-12));
    CHECK(cfg.optimizer.de.population == 32);
    CHECK(cfg.optimizer.de.weight == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(cfg.optimizer.de.crossover == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(cfg.seed == 1);
    CHECK_FALSE(cfg.paint.has_value());
    CHECK_FALSE(cfg.waveform.has_value());

    // the two beams cross at right angles and paint horizontal strokes
    CHECK(cfg.lines[0].beam.axis.dot(cfg.lines[1].beam.axis) ==
          doctest::Approx(0.0).scale(1e-9));
    CHECK(cfg.lines[0].beam.paint_axis.dot(cfg.lines[0].beam.axis) ==
          doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("optional sections parse when present") {
    const RunConfig cfg = load_config(config_dir() + "/painting_scan.json");
    REQUIRE(cfg.paint.has_value());
    CHECK(cfg.paint->waist_m == doctest::Approx(5e-6).epsilon(1e-12));
    CHECK(cfg.paint->kappa_m_per_Hz == doctest::Approx(1e-11).epsilon(1e-12));
    REQUIRE(cfg.paint->painting_freqs_Hz.size() == 3);
    CHECK(cfg.paint->painting_freqs_Hz[1] == doctest::Approx(1e6).epsilon(1e-12));
    REQUIRE(cfg.waveform.has_value());
    CHECK(cfg.waveform->beam_index == 1);
    CHECK(cfg.waveform->sample_rate_Hz == doctest::Approx(2.304e8).epsilon(1e-12));
    CHECK(cfg.waveform->n_periods == 4);
}

TEST_CASE("configs round-trip byte-identically through save and load") {
    namespace fs = std::filesystem;
    for (const char* name :
         {"production.json", "fast_sequence.json", "distillation.json",
          "painting_scan.json", "optimize_240ms.json"}) {
        const std::string path = config_dir() + "/" + name;
        const RunConfig cfg = load_config(path);
        const fs::path tmp = fs::temp_directory_path() / "painttrap_roundtrip.json";
        save_config(cfg, tmp.string());
        CHECK(slurp(tmp.string()) == slurp(path));
        fs::remove(tmp);
    }
}

namespace {

// Expect a ConfigError whose message names the offending key.
void expect_unknown_key(const std::string& text, const std::string& key) {
    try {
        static_cast<void>(parse_config_text(text));
        FAIL("expected ConfigError for key '" << key << "'");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
}

} // namespace

TEST_CASE("unknown keys are rejected wherever they appear") {
    const std::string text = slurp(config_dir() + "/production.json");

    nlohmann::json top = nlohmann::json::parse(text);
    top["bogus"] = 1;
    expect_unknown_key(top.dump(), "bogus");

    nlohmann::json beam = nlohmann::json::parse(text);
    beam["beams"][0]["waist_mm"] = 0.035;
    expect_unknown_key(beam.dump(), "waist_mm");

    nlohmann::json model = nlohmann::json::parse(text);
    model["model"]["alpha"] = 2.0;
    expect_unknown_key(model.dump(), "alpha");
}

TEST_CASE("syntax and schema failures raise config errors") {
    CHECK_THROWS_AS(static_cast<void>(parse_config_text("{ not json")), ConfigError);

    nlohmann::json missing = nlohmann::json::parse(slurp(config_dir() + "/production.json"));
    missing.erase("beams");
    CHECK_THROWS_AS(static_cast<void>(parse_config_text(missing.dump())), ConfigError);

    nlohmann::json bad = nlohmann::json::parse(slurp(config_dir() + "/production.json"));
    bad["molasses"]["temperature_K"] = -1.0;
    CHECK_THROWS_AS(static_cast<void>(parse_config_text(bad.dump())), ConfigError);
}

TEST_CASE("missing files are I/O failures, not validation failures") {
    CHECK_THROWS_AS(static_cast<void>(load_config("/no/such/painttrap.json")), IoError);
}

TEST_CASE("the simulation context carries the full scenario") {
    const RunConfig cfg = load_config(config_dir() + "/optimize_240ms.json");
    const SimContext ctx = cfg.context();
    CHECK(ctx.schedule.evaporation_s() == doctest::Approx(0.24).epsilon(1e-9));
    CHECK(ctx.molasses.atoms == cfg.molasses.atoms);
    CHECK(ctx.sim.dt_s == cfg.sim.dt_s);
    CHECK(ctx.model.tau_bg_s == cfg.model.tau_bg_s);
    CHECK(ctx.setup.lines[0].beam.waist_x_m == cfg.lines[0].beam.waist_x_m);
    CHECK(cfg.optimizer.de.generations >= 60);
}

} // TEST_SUITE
