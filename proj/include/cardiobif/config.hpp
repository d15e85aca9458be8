#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cardiobif/analysis.hpp"
#include "cardiobif/continuation.hpp"
#include "cardiobif/cycles.hpp"
#include "cardiobif/integrate.hpp"
#include "cardiobif/tissue.hpp"

namespace cardiobif {

struct ParamOverride {
    std::string name;
    double value;
};

// One single-cell run: variant, parameter overrides, stimulus pulse.
struct CellRunConfig {
    Variant variant = Variant::modified;
    std::vector<ParamOverride> overrides;
    Pulse stim{100.0, 2.0, 71.5, 0.0};
};

struct SingleCellConfig {
    CellRunConfig a;
    bool compare = false; // run b as well and write a comparison
    CellRunConfig b;
    double t_end = 700.0;
    IntegratorConfig integrator{Method::adaptive_rk};
    AnalysisOptions analysis;
};

struct ContinuationConfig {
    std::string parameter = "K_i_fixed";
    Variant variant = Variant::modified;
    std::vector<ParamOverride> overrides;
    double seed = 138.0;          // parameter value where the branch is seeded
    std::optional<double> seed_b; // optional second equilibrium branch
    double relax_ms = 20000.0;    // stimulus-free settle before Newton
    double lambda_min = 0.0;
    double lambda_max = 150.0;
    int direction = -1; // initial parameter direction of the branch walk
    ContinuationOptions eq;
    bool cycles = false; // continue a limit-cycle branch from the first Hopf
    int pd_restarts = 0; // successive period-doubling branch switches
    CycleOptions cycle;
};

struct TissueConfig {
    Variant variant = Variant::original;
    std::vector<ParamOverride> overrides;
    int nx = 200, ny = 200;
    double dx = 0.025;   // cm
    double D = 0.00154;  // cm^2/ms
    double dt = 0.0812;  // ms
    double t_end = 1000.0;
    int threads = 1;
    bool threads_auto = false; // threads = auto (rejected by --seedless)
    StimulusRect s1{0, 0, 6, 200, 0.0, 2.0, 26.2};
    bool s2_enabled = false;
    StimulusRect s2{0, 0, 100, 100, 400.0, 2.0, 26.2};
    bool switch_enabled = false;
    double switch_t = 4000.0;
    std::vector<ParamOverride> switch_overrides;
    double snapshot_dt = 0.0;
    bool pgm = false;
};

struct ExperimentConfig {
    enum class Kind { single_cell, continuation, tissue };
    Kind kind = Kind::single_cell;
    std::string preset;        // informational id when launched from a preset
    std::string out_dir = "out";
    std::string scale = "desk"; // tissue resolution actually used: desk | full
    SingleCellConfig cell;
    ContinuationConfig cont;
    TissueConfig tissue;
    // raw "tissue.full.*" overrides, applied by resolve_full_scale
    std::vector<std::pair<std::string, std::string>> full_overrides;
};

// Flat "key = value" text with dotted sections and '#' comments. Unknown keys,
// malformed values and contract violations throw ConfigError naming the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Applies the tissue.full.* overrides (throws ConfigError when there are
// none) and marks the config full-scale; without this call configs run at
// their desk-scale values.
void resolve_full_scale(ExperimentConfig& config);

// Re-checks every cross-field contract (parameter names exist, rectangles fit
// the grid, CFL bound, positive times). Throws ConfigError with a field path.
void validate_config(const ExperimentConfig& config);

// Deterministic round-trippable rendering with every default made explicit;
// identical configs serialize to identical bytes.
std::string serialize_config(const ExperimentConfig& config);

} // namespace cardiobif
