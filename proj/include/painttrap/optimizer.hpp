#ifndef PAINTTRAP_OPTIMIZER_HPP
#define PAINTTRAP_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "painttrap/evaporation.hpp"

namespace painttrap {

struct ParamDesc {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    std::string unit;
};

struct ParameterSpace {
    std::vector<ParamDesc> params;

    size_t size() const { return params.size(); }
    void validate() const; // throws std::invalid_argument unless lower < upper
    // Fold a value into [lower, upper] by reflection at the walls.
    double reflect(size_t index, double value) const;
};

struct DeConfig {
    int population = 32;   // NP
    double weight = 0.7;   // F
    double crossover = 0.9; // CR
    int generations = 100; // evolution steps after the initial population
    std::uint64_t seed = 1;
    int threads = 1; // objective evaluations run in parallel chunks

    void validate() const;
};

struct Evaluation {
    int generation = 0;
    int member = 0;
    double objective = 0.0;
    std::vector<double> params;
    double wall_s = 0.0;
};

struct RunRecord {
    std::vector<Evaluation> evaluations;
    std::vector<double> best_curve; // best population objective per generation
};

struct DeResult {
    std::vector<double> best_params;
    double best_value = 0.0;
    RunRecord record;
};

using Objective = std::function<double(std::span<const double>)>;

// DE/rand/1/bin maximizer. Deterministic for a fixed seed regardless of
// thread count: every random draw comes from a StreamRng keyed by
// (seed, generation, member). Objective exceptions score -infinity and the
// run continues. Selection accepts ties so the population can drift across
// flat (all-failed) regions.
DeResult de_optimize(const Objective& objective, const ParameterSpace& space,
                     const DeConfig& cfg);

// Header `generation,member,objective,p1..pK`, one row per evaluation.
void write_runrecord_csv(const RunRecord& record, std::ostream& os);

// Everything needed to score a candidate schedule.
struct SimContext {
    TrapSetup setup;
    RampSchedule schedule; // template: durations, tail, seed values
    MolassesParams molasses;
    SimOptions sim;
    EvapModel model;
};

// Load the trap from molasses at the schedule's initial controls, run the
// schedule, and return the condensed atom number N_tot * condensate_fraction
// at the end. Physics failures (untrapped, boiled) score 0.
double simulate_condensed_atoms(const SimContext& ctx, const RampSchedule& schedule);

// ---- Stage 2: evaporation ramps ------------------------------------------
//
// 26 parameters: for each of the 6 ramps the end values of (P1, P2, xs1,
// xs2) — segment starts are chained from the previous end, the first start
// and the whole hold/ramp-up tail stay fixed at the template — plus the
// initial distillation gradient Bp_init and its linear switch-off time
// t_off, with Bp(t) = Bp_init * max(0, 1 - t/t_off) sampled at segment
// boundaries.

ParameterSpace stage2_space(const RampSchedule& tmpl);
RampSchedule decode_stage2(const RampSchedule& tmpl, std::span<const double> params);
std::vector<double> encode_stage2(const RampSchedule& schedule);

// ---- Stage 1: loading era -------------------------------------------------
//
// 14 parameters: 10 laser-cooling settings that the simulator cannot model
// from first principles — they enter through molasses_surrogate(), a smooth
// SYNTHETIC stand-in mapping them to (atom number, temperature, radius) —
// plus the 4 initial ODT settings (P1, P2, xs1, xs2) at the start of the
// first ramp.

struct Stage1Result {
    MolassesParams molasses;
    Controls initial; // gradient taken from the template
};

ParameterSpace stage1_space();
// laser = the first 10 stage-1 parameters, in stage1_space() order.
MolassesParams molasses_surrogate(std::span<const double> laser);
Stage1Result decode_stage1(std::span<const double> params, const RampSchedule& tmpl);
// Template with the first ramp's start controls replaced by `s.initial`.
RampSchedule apply_stage1(const RampSchedule& tmpl, const Stage1Result& s);

struct TwoStageResult {
    DeResult stage1;
    DeResult stage2;
    MolassesParams molasses;   // stage-1 best
    RampSchedule best_schedule; // stage-1 start + stage-2 ramps
};

// Stage 1 tunes loading with the template ramps; stage 2 freezes the
// stage-1 loading and tunes the 26 ramp parameters.
TwoStageResult two_stage_optimize(const SimContext& ctx, const DeConfig& stage1_cfg,
                                  const DeConfig& stage2_cfg);

// ---- Analytic benchmarks ---------------------------------------------------

// maximize -sum x_i^2 over [-5,5]^dim; optimum 0 at the origin.
ParameterSpace sphere_space(int dim);
double sphere_objective(std::span<const double> x);

// maximize -[(1-x)^2 + 100(y-x^2)^2] over [-2,2]^2; optimum 0 at (1,1).
ParameterSpace rosenbrock_space();
double rosenbrock_objective(std::span<const double> x);

} // namespace painttrap

#endif
