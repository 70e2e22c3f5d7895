#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdecalib/experiments.hpp"

namespace pdecalib {

// Named experiment configurations. Each returns a full config tree that
// resolve_config accepts unchanged; callers may override any key.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);  // throws ConfigError on unknown names

// Applies one "dotted.key=value" override to a config tree. The value is
// parsed as JSON when possible (numbers, booleans, arrays), else kept as a
// string. Throws ConfigError on a malformed assignment.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Fully validated, default-filled view of a config tree. Every field is the
// effective value the commands run with.
struct RunConfig {
    std::string command;  // simulate | calibrate | sweep | sensitivity | baseline | verify-bounds
    std::string problem = "diffusion";  // diffusion | wave-c1 | wave-c2 | burgers

    int grid_n = 0;
    double x_min = -1.0;
    double x_max = 1.0;

    std::vector<double> anchors = {0.1};
    double dt = 0.0;       // snapshot spacing inside a group (the loss step)
    int m = 2;             // snapshots per group
    double sim_dt = 0.0;   // data-generation step; 0 = problem default
    double t_end = 0.0;    // simulate horizon; 0 = last anchor + (m-1) dt
    int save_every = 1;    // simulate output decimation

    std::vector<int> hidden_widths = {20, 20};
    std::string output_kind = "identity";  // identity | bounded
    double output_lo = 0.0;
    double output_hi = 0.0;

    OptimizerConfig optimizer;

    double noise_std = 0.0;
    std::uint64_t noise_seed = 0;  // effective value (derived from seed when unset)
    double lambda = 0.0;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = logical cores

    std::vector<double> sweep_dt;
    std::vector<int> sweep_n;
    int sweep_seeds = 1;
    std::string sweep_order = "n-major";  // n-major | dt-major row expansion

    std::vector<double> deltas;
    int n_alpha = 21;
    std::string quantity = "value-at-point";  // value-at-point | max
    double x_star = 0.0;

    double burgers_diffusion = 0.1;
    double burgers_clamp = 1e-2;
    bool burgers_paper_scale = false;

    int bounds_samples = 1000;
    std::vector<double> bounds_caps = {0.5, 0.9, 1.5};
    std::vector<int> bounds_depths = {2, 3, 4};
    int bounds_grid_n = 401;
    double bounds_scale = 3.0;
    double bounds_tolerance = 1e-4;

    std::string out_dir;

    NetworkArchitecture architecture() const;
    ManufacturedProblem manufactured() const;

    // Canonical config tree with every effective value spelled out; feeding
    // it back through resolve_config reproduces this struct.
    nlohmann::json to_json() const;
};

// Validates the tree against the documented schema. Unknown keys, missing
// required keys, and out-of-range values throw ConfigError naming the
// offending dotted key.
RunConfig resolve_config(const nlohmann::json& config);

// Rows a sweep config expands to: |sweep.dt| * |sweep.n| * sweep.seeds.
int planned_sweep_rows(const RunConfig& config);

// Full command-line entry point; returns the process exit code
// (0 ok, 2 config/schema violation, 3 numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace pdecalib
