#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

// Process-level contract of the painttrap binary: exit codes, output files,
// and run-to-run determinism.  Each test drives the real executable through
// std::system with stdout/stderr captured to a log file.

namespace fs = std::filesystem;

namespace {

std::string cli_path() { return PAINTTRAP_CLI_PATH; }
std::string config_dir() { return PAINTTRAP_CONFIG_DIR; }

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path log =
        fs::temp_directory_path() / ("painttrap_cli_" + std::to_string(counter++) + ".log");
    const std::string cmd = cli_path() + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream f(log, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    r.output = ss.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing " << path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<double> csv_row(const std::string& line) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    return values;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("painttrap_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("help text exits cleanly") {
    const RunResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("paint") != std::string::npos);
    CHECK(r.output.find("evap") != std::string::npos);
}

TEST_CASE("evap run writes a trajectory and keeps the m_F=0 majority") {
    const fs::path out = fresh_dir("evap");
    const RunResult r =
        run_cli("evap --config " + config_dir() + "/distillation.json --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("final:") != std::string::npos);

    const std::vector<std::string> rows = lines_of(slurp(out / "trajectory.csv"));
    REQUIRE(rows.size() >= 3);
    CHECK(rows[0] ==
          "t_s,P1_W,P2_W,xs1_m,xs2_m,Bp_Tpm,fx_Hz,fy_Hz,fz_Hz,depth0_uK,depthpm1_uK,"
          "N_m1,N_0,N_p1,T_K,eta0,gamma_el_Hz,psd,cond_frac");

    const std::vector<double> last = csv_row(rows.back());
    REQUIRE(last.size() == 19);
    const double n_m1 = last[11];
    const double n_0 = last[12];
    const double n_p1 = last[13];
    const double total = n_m1 + n_0 + n_p1;
    REQUIRE(total > 0.0);
    // The magnetic gradient tilts the |m_F| = 1 wells; the schedule should
    // leave an almost pure m_F = 0 cloud behind.
    CHECK(n_0 / total > 0.9);

    CHECK(fs::exists(out / "summary.json"));
}

TEST_CASE("identical seeds give byte-identical trajectories") {
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    const std::string base = "evap --config " + config_dir() + "/production.json --seed 42 --out ";
    CHECK(run_cli(base + a.string()).exit_code == 0);
    CHECK(run_cli(base + b.string()).exit_code == 0);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("missing config file is an I/O failure (exit 3)") {
    const RunResult r = run_cli("evap --config /no/such/file.json");
    CHECK(r.exit_code == 3);
}

TEST_CASE("config with an unknown key is a validation failure (exit 1)") {
    nlohmann::json cfg = nlohmann::json::parse(slurp(config_dir() + "/production.json"));
    cfg["beams"][0]["typo_key"] = 1.0;
    const fs::path out = fresh_dir("badkey");
    const fs::path path = out / "bad.json";
    std::ofstream(path) << cfg.dump(1);
    const RunResult r = run_cli("evap --config " + path.string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("typo_key") != std::string::npos);
}

TEST_CASE("physics failure exits 2 under --strict and 0 otherwise") {
    // Collapse both beams in 20 ms: the trap disappears long before the
    // cloud could follow adiabatically, so the run aborts mid-schedule.
    nlohmann::json cfg = nlohmann::json::parse(slurp(config_dir() + "/production.json"));
    nlohmann::json seg = cfg["schedule"]["segments"][0];
    seg["duration_s"] = 0.02;
    seg["power_end_W"] = {0.0, 0.0};
    cfg["schedule"]["segments"] = nlohmann::json::array({seg});
    const fs::path out = fresh_dir("crash");
    const fs::path path = out / "crash.json";
    std::ofstream(path) << cfg.dump(1);

    const RunResult strict =
        run_cli("evap --strict --config " + path.string() + " --out " + out.string());
    CHECK(strict.exit_code == 2);
    CHECK(strict.output.find("physics failure") != std::string::npos);
    // The partial trajectory is still written for post-mortem plots.
    CHECK(lines_of(slurp(out / "trajectory.csv")).size() >= 2);

    const fs::path lax_out = fresh_dir("crash_lax");
    const RunResult lax =
        run_cli("evap --config " + path.string() + " --out " + lax_out.string());
    CHECK(lax.exit_code == 0);
}

TEST_CASE("trap subcommand reports the instantaneous characterization") {
    const fs::path out = fresh_dir("trap");
    const RunResult r = run_cli("trap --at 0.1 --config " + config_dir() +
                                "/production.json --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("frequencies") != std::string::npos);

    const std::vector<std::string> rows = lines_of(slurp(out / "trap.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "t_s,x_m,y_m,z_m,fx_Hz,fy_Hz,fz_Hz,depth_m1_uK,depth_0_uK,depth_p1_uK");
    const std::vector<double> row = csv_row(rows[1]);
    REQUIRE(row.size() == 10);
    CHECK(row[0] == 0.1);
    CHECK(row[4] > 0.0);  // fx
    CHECK(row[8] > 0.0);  // m_F = 0 depth in uK
}

TEST_CASE("paint subcommand scans the painting frequency") {
    const fs::path out = fresh_dir("paint");
    const RunResult r =
        run_cli("paint --config " + config_dir() + "/painting_scan.json --out " + out.string());
    CHECK(r.exit_code == 0);

    const std::vector<std::string> rows = lines_of(slurp(out / "corrugation.csv"));
    REQUIRE(rows.size() == 4); // header + one row per scanned frequency
    CHECK(rows[0] == "painting_freq_Hz,well_spacing_m,corrugation");
    for (int c = 0; c < 3; ++c) {
        CHECK(fs::exists(out / ("spectrum_case" + std::to_string(c) + ".csv")));
        CHECK(fs::exists(out / ("profile_case" + std::to_string(c) + ".csv")));
        CHECK(fs::exists(out / ("map_case" + std::to_string(c) + ".csv")));
    }
}

TEST_CASE("export-waveform writes the drive table") {
    const fs::path out = fresh_dir("wave");
    const RunResult r = run_cli("export-waveform --format csv --config " + config_dir() +
                                "/painting_scan.json --out " + out.string());
    CHECK(r.exit_code == 0);
    const std::vector<std::string> rows = lines_of(slurp(out / "waveform.csv"));
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "t_s,f_Hz,phase_rad");
    const std::vector<double> first = csv_row(rows[1]);
    REQUIRE(first.size() == 3);
    CHECK(first[0] == 0.0);
    CHECK(first[2] == 0.0); // phase reference
}

TEST_CASE("optimizer benchmark converges and reports its best point") {
    const fs::path out = fresh_dir("bench");
    const RunResult r = run_cli("optimize --benchmark rosenbrock --config " + config_dir() +
                                "/production.json --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("benchmark rosenbrock: best value") != std::string::npos);
    CHECK(fs::exists(out / "runrecord_benchmark.csv"));
}
