#include "pdecalib/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "pdecalib/errors.hpp"
#include "pdecalib/io.hpp"
#include "pdecalib/random.hpp"
#include "pdecalib/sensitivity.hpp"

namespace pdecalib {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Schema walk: every known object key, so misspellings fail loudly with the
// offending dotted path instead of being silently ignored.

const std::map<std::string, std::vector<std::string>>& schema_groups() {
    static const std::map<std::string, std::vector<std::string>> groups = {
        {"",
         {"command", "problem", "grid", "time", "network", "optimizer", "noise", "lambda", "seed",
          "jobs", "out", "sweep", "sensitivity", "burgers", "bounds"}},
        {"grid", {"n", "x_min", "x_max"}},
        {"time", {"anchors", "dt", "m", "sim_dt", "t_end", "save_every"}},
        {"network", {"hidden_widths", "output", "lo", "hi"}},
        {"optimizer",
         {"memory", "max_iters", "eps1", "eps2", "wolfe_c1", "wolfe_c2", "wolfe_max_trials",
          "projection"}},
        {"noise", {"std", "seed"}},
        {"sweep", {"dt", "n", "seeds", "order"}},
        {"sensitivity", {"delta", "n_alpha", "quantity", "x_star"}},
        {"burgers", {"diffusion", "clamp", "paper_scale"}},
        {"bounds", {"samples", "caps", "depths", "grid_n", "scale", "tolerance"}},
    };
    return groups;
}

void validate_keys(const json& node, const std::string& prefix) {
    const auto& groups = schema_groups();
    const auto it = groups.find(prefix);
    if (it == groups.end()) return;  // leaf values are type-checked on read
    if (!node.is_object())
        throw ConfigError("key '" + (prefix.empty() ? std::string("<root>") : prefix) +
                          "' must be an object");
    for (const auto& [key, value] : node.items()) {
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
            throw ConfigError("unknown config key '" + full + "'");
        if (groups.count(full)) validate_keys(value, full);
    }
}

// ---------------------------------------------------------------------------
// Typed readers that name the dotted key in every failure.

const json* find_key(const json& root, const std::string& dotted) {
    const json* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot - start);
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &(*node)[part];
        if (dot == std::string::npos) return node;
        start = dot + 1;
    }
}

double read_number(const json& root, const std::string& key, double fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError("key '" + key + "' must be a number");
    return v->get<double>();
}

double require_number(const json& root, const std::string& key) {
    const json* v = find_key(root, key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    if (!v->is_number()) throw ConfigError("key '" + key + "' must be a number");
    return v->get<double>();
}

int read_int(const json& root, const std::string& key, int fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
    return v->get<int>();
}

int require_int(const json& root, const std::string& key) {
    const json* v = find_key(root, key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    if (!v->is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
    return v->get<int>();
}

std::uint64_t read_seed(const json& root, const std::string& key, std::uint64_t fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                    v->get<std::int64_t>() < 0))
        throw ConfigError("key '" + key + "' must be a non-negative integer");
    return v->get<std::uint64_t>();
}

bool read_bool(const json& root, const std::string& key, bool fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("key '" + key + "' must be a boolean");
    return v->get<bool>();
}

std::string read_string(const json& root, const std::string& key, const std::string& fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError("key '" + key + "' must be a string");
    return v->get<std::string>();
}

std::vector<double> read_number_array(const json& root, const std::string& key,
                                      std::vector<double> fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError("key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& e : *v) {
        if (!e.is_number()) throw ConfigError("key '" + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> read_int_array(const json& root, const std::string& key,
                                std::vector<int> fallback) {
    const json* v = find_key(root, key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError("key '" + key + "' must be an array of integers");
    std::vector<int> out;
    for (const json& e : *v) {
        if (!e.is_number_integer())
            throw ConfigError("key '" + key + "' must be an array of integers");
        out.push_back(e.get<int>());
    }
    return out;
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool is_known_command(const std::string& c) {
    return c == "simulate" || c == "calibrate" || c == "sweep" || c == "sensitivity" ||
           c == "baseline" || c == "verify-bounds";
}

// Anchor times for the wave runs: the observation times k/3 are snapped onto
// the simulation lattice and pulled back 20 steps so a group spans
// {t, t+10 dt, t+20 dt} ending at (the lattice neighbour of) k/3.
std::vector<double> wave_anchor_times(double sim_dt) {
    std::vector<double> anchors;
    for (int k = 1; k <= 3; ++k) {
        const long long idx = std::llround(k / 3.0 / sim_dt) - 20;
        anchors.push_back(static_cast<double>(idx) * sim_dt);
    }
    return anchors;
}

json wave_preset(const std::string& problem) {
    json j;
    j["problem"] = problem;
    j["grid"] = {{"n", 501}};
    j["time"] = {{"anchors", wave_anchor_times(1e-4)},
                 {"dt", 1e-3},
                 {"m", 3},
                 {"sim_dt", 1e-4}};
    j["network"] = {{"hidden_widths", {20, 20}},
                    {"output", "bounded"},
                    {"lo", 0.0},
                    {"hi", 2.0}};
    j["noise"] = {{"std", 1e-7}};
    j["lambda"] = 0.0;
    return j;
}

json diffusion_fig_preset() {
    json j;
    j["problem"] = "diffusion";
    j["grid"] = {{"n", 1001}};
    j["time"] = {{"anchors", {0.1}}, {"dt", 1e-3}, {"m", 2}};
    j["network"] = {{"hidden_widths", {20, 20}}, {"output", "identity"}};
    j["noise"] = {{"std", 0.0}};
    j["lambda"] = 0.0;
    return j;
}

json fig2_preset(const std::string& order) {
    json j;
    j["problem"] = "diffusion";
    j["time"] = {{"anchors", {0.1}}, {"dt", 1e-2}, {"m", 2}};
    j["network"] = {{"hidden_widths", {20, 20}}, {"output", "identity"}};
    j["noise"] = {{"std", 0.0}};
    j["lambda"] = 0.0;
    j["sweep"] = {{"dt", {0.1, 0.05, 0.01, 0.005, 0.001}},
                  {"n", {10, 20, 40, 80, 160, 320, 640}},
                  {"seeds", 3},
                  {"order", order}};
    return j;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"paper-fig1",    "paper-fig2-dt", "paper-fig2-h",       "paper-wave-c1",
            "paper-wave-c2", "paper-burgers", "paper-sens-diffusion"};
}

json preset_config(const std::string& name) {
    if (name == "paper-fig1") return diffusion_fig_preset();
    if (name == "paper-fig2-dt") return fig2_preset("n-major");
    if (name == "paper-fig2-h") return fig2_preset("dt-major");
    if (name == "paper-wave-c1") return wave_preset("wave-c1");
    if (name == "paper-wave-c2") return wave_preset("wave-c2");
    if (name == "paper-burgers") {
        json j;
        j["problem"] = "burgers";
        j["grid"] = {{"n", 251}};
        std::vector<double> anchors;
        for (int k = 1; k <= 19; ++k) anchors.push_back(0.01 * k);
        j["time"] = {{"anchors", anchors}, {"dt", 0.01}, {"m", 2}, {"sim_dt", 2e-5}};
        j["network"] = {{"hidden_widths", {40, 40, 40, 40}}, {"output", "identity"}};
        j["noise"] = {{"std", 1e-5}};
        j["lambda"] = 0.01;
        j["burgers"] = {{"diffusion", 0.1}, {"clamp", 0.01}, {"paper_scale", false}};
        return j;
    }
    if (name == "paper-sens-diffusion") {
        json j = diffusion_fig_preset();
        j["noise"] = {{"std", 3e-7}};
        // Observations are noisy here: stop at the residual plateau instead of
        // optimizing into the noise floor, which overfits the field near the
        // boundary where the data barely constrains it.
        j["optimizer"] = {{"eps1", 1e-4}};
        j["sensitivity"] = {{"delta", {0.001, 0.002, 0.003}},
                            {"n_alpha", 21},
                            {"quantity", "value-at-point"},
                            {"x_star", 0.0}};
        return j;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

void apply_override(json& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string dotted = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // unquoted strings pass through verbatim
    }

    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot - start);
        if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key part");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        if (!node->is_object())
            throw ConfigError("override '" + dotted + "' descends into a non-object value");
        start = dot + 1;
    }
}

NetworkArchitecture RunConfig::architecture() const {
    NetworkArchitecture arch;
    arch.hidden_widths = hidden_widths;
    arch.output = (output_kind == "bounded") ? OutputTransform::bounded(output_lo, output_hi)
                                             : OutputTransform::identity();
    arch.validate();
    return arch;
}

ManufacturedProblem RunConfig::manufactured() const {
    ManufacturedProblem p;
    if (problem == "diffusion")
        p = diffusion_problem();
    else if (problem == "wave-c1")
        p = wave_problem_smooth();
    else if (problem == "wave-c2")
        p = wave_problem_piecewise();
    else if (problem == "burgers")
        p = burgers_problem(BurgersSetup{1.0, burgers_clamp, burgers_diffusion});
    else
        throw ConfigError("key 'problem' must be one of diffusion, wave-c1, wave-c2, burgers");
    if (sim_dt > 0.0) p.sim_dt = sim_dt;
    return p;
}

json RunConfig::to_json() const {
    json j;
    if (!command.empty()) j["command"] = command;
    j["problem"] = problem;
    j["grid"] = {{"n", grid_n}, {"x_min", x_min}, {"x_max", x_max}};
    j["time"] = {{"anchors", anchors}, {"dt", dt},       {"m", m},
                 {"sim_dt", sim_dt},   {"t_end", t_end}, {"save_every", save_every}};
    j["network"] = {{"hidden_widths", hidden_widths}, {"output", output_kind}};
    if (output_kind == "bounded") {
        j["network"]["lo"] = output_lo;
        j["network"]["hi"] = output_hi;
    }
    j["optimizer"] = {{"memory", optimizer.memory},
                      {"max_iters", optimizer.max_iters},
                      {"eps1", optimizer.eps1},
                      {"eps2", optimizer.eps2},
                      {"wolfe_c1", optimizer.wolfe.c1},
                      {"wolfe_c2", optimizer.wolfe.c2},
                      {"wolfe_max_trials", optimizer.wolfe.max_trials},
                      {"projection", optimizer.projection ? optimizer.projection->bound : 0.0}};
    j["noise"] = {{"std", noise_std}, {"seed", noise_seed}};
    j["lambda"] = lambda;
    j["seed"] = seed;
    j["jobs"] = jobs;
    if (!out_dir.empty()) j["out"] = out_dir;
    if (!sweep_dt.empty() || !sweep_n.empty())
        j["sweep"] = {{"dt", sweep_dt}, {"n", sweep_n}, {"seeds", sweep_seeds}, {"order", sweep_order}};
    if (!deltas.empty())
        j["sensitivity"] = {{"delta", deltas},
                            {"n_alpha", n_alpha},
                            {"quantity", quantity},
                            {"x_star", x_star}};
    if (problem == "burgers")
        j["burgers"] = {{"diffusion", burgers_diffusion},
                        {"clamp", burgers_clamp},
                        {"paper_scale", burgers_paper_scale}};
    if (command == "verify-bounds")
        j["bounds"] = {{"samples", bounds_samples},   {"caps", bounds_caps},
                       {"depths", bounds_depths},     {"grid_n", bounds_grid_n},
                       {"scale", bounds_scale},       {"tolerance", bounds_tolerance}};
    return j;
}

RunConfig resolve_config(const json& config) {
    validate_keys(config, "");

    RunConfig cfg;
    cfg.command = read_string(config, "command", "");
    if (!cfg.command.empty())
        check(is_known_command(cfg.command),
              "key 'command' must be one of simulate, calibrate, sweep, sensitivity, baseline, "
              "verify-bounds");

    cfg.problem = read_string(config, "problem", "diffusion");
    check(cfg.problem == "diffusion" || cfg.problem == "wave-c1" || cfg.problem == "wave-c2" ||
              cfg.problem == "burgers",
          "key 'problem' must be one of diffusion, wave-c1, wave-c2, burgers");

    const bool needs_grid = cfg.command != "sweep" && cfg.command != "verify-bounds";
    const bool needs_dt = cfg.command == "calibrate" || cfg.command == "baseline" ||
                          cfg.command == "sensitivity";

    cfg.x_min = read_number(config, "grid.x_min", -1.0);
    cfg.x_max = read_number(config, "grid.x_max", 1.0);
    check(cfg.x_min < cfg.x_max, "key 'grid.x_min' must be below 'grid.x_max'");
    if (needs_grid)
        cfg.grid_n = require_int(config, "grid.n");
    else
        cfg.grid_n = read_int(config, "grid.n", 0);
    if (needs_grid || find_key(config, "grid.n"))
        check(cfg.grid_n >= 3, "key 'grid.n' must be at least 3");

    cfg.anchors = read_number_array(config, "time.anchors", {0.1});
    check(!cfg.anchors.empty(), "key 'time.anchors' must not be empty");
    for (double t : cfg.anchors) check(t >= 0.0, "key 'time.anchors' entries must be >= 0");
    if (needs_dt)
        cfg.dt = require_number(config, "time.dt");
    else
        cfg.dt = read_number(config, "time.dt", 0.0);
    if (needs_dt || find_key(config, "time.dt"))
        check(cfg.dt > 0.0, "key 'time.dt' must be positive");
    cfg.m = read_int(config, "time.m", 2);
    check(cfg.m >= 2, "key 'time.m' must be at least 2");
    cfg.sim_dt = read_number(config, "time.sim_dt", 0.0);
    check(cfg.sim_dt >= 0.0, "key 'time.sim_dt' must be >= 0");
    cfg.t_end = read_number(config, "time.t_end", 0.0);
    check(cfg.t_end >= 0.0, "key 'time.t_end' must be >= 0");
    cfg.save_every = read_int(config, "time.save_every", 1);
    check(cfg.save_every >= 1, "key 'time.save_every' must be at least 1");

    cfg.hidden_widths = read_int_array(config, "network.hidden_widths", {20, 20});
    check(!cfg.hidden_widths.empty(), "key 'network.hidden_widths' must not be empty");
    for (int w : cfg.hidden_widths)
        check(w >= 1, "key 'network.hidden_widths' entries must be positive");
    cfg.output_kind = read_string(config, "network.output", "identity");
    check(cfg.output_kind == "identity" || cfg.output_kind == "bounded",
          "key 'network.output' must be 'identity' or 'bounded'");
    if (cfg.output_kind == "bounded") {
        cfg.output_lo = require_number(config, "network.lo");
        cfg.output_hi = require_number(config, "network.hi");
        check(cfg.output_lo < cfg.output_hi, "key 'network.lo' must be below 'network.hi'");
    }

    cfg.optimizer.memory = read_int(config, "optimizer.memory", 10);
    check(cfg.optimizer.memory >= 1, "key 'optimizer.memory' must be at least 1");
    cfg.optimizer.max_iters = read_int(config, "optimizer.max_iters", 5000);
    check(cfg.optimizer.max_iters >= 1, "key 'optimizer.max_iters' must be at least 1");
    cfg.optimizer.eps1 = read_number(config, "optimizer.eps1", 1e-12);
    cfg.optimizer.eps2 = read_number(config, "optimizer.eps2", 1e-12);
    check(cfg.optimizer.eps1 >= 0.0, "key 'optimizer.eps1' must be >= 0");
    check(cfg.optimizer.eps2 >= 0.0, "key 'optimizer.eps2' must be >= 0");
    cfg.optimizer.wolfe.c1 = read_number(config, "optimizer.wolfe_c1", 1e-4);
    cfg.optimizer.wolfe.c2 = read_number(config, "optimizer.wolfe_c2", 0.9);
    check(0.0 < cfg.optimizer.wolfe.c1 && cfg.optimizer.wolfe.c1 < cfg.optimizer.wolfe.c2 &&
              cfg.optimizer.wolfe.c2 < 1.0,
          "keys 'optimizer.wolfe_c1'/'optimizer.wolfe_c2' must satisfy 0 < c1 < c2 < 1");
    cfg.optimizer.wolfe.max_trials = read_int(config, "optimizer.wolfe_max_trials", 40);
    check(cfg.optimizer.wolfe.max_trials >= 1,
          "key 'optimizer.wolfe_max_trials' must be at least 1");
    const double projection = read_number(config, "optimizer.projection", 0.0);
    check(projection >= 0.0, "key 'optimizer.projection' must be >= 0 (0 disables it)");
    if (projection > 0.0) cfg.optimizer.projection = ProjectionConstraint{projection, true};

    cfg.seed = read_seed(config, "seed", 0);
    cfg.noise_std = read_number(config, "noise.std", 0.0);
    check(cfg.noise_std >= 0.0, "key 'noise.std' must be >= 0");
    cfg.noise_seed = read_seed(config, "noise.seed", derive_seed(cfg.seed, 1));

    cfg.lambda = read_number(config, "lambda", 0.0);
    check(cfg.lambda >= 0.0, "key 'lambda' must be >= 0");
    cfg.jobs = read_int(config, "jobs", 0);
    check(cfg.jobs >= 0, "key 'jobs' must be >= 0 (0 = logical cores)");
    cfg.out_dir = read_string(config, "out", "");

    cfg.sweep_dt = read_number_array(config, "sweep.dt", {});
    cfg.sweep_n = read_int_array(config, "sweep.n", {});
    for (double v : cfg.sweep_dt) check(v > 0.0, "key 'sweep.dt' entries must be positive");
    for (int v : cfg.sweep_n) check(v >= 3, "key 'sweep.n' entries must be at least 3");
    cfg.sweep_seeds = read_int(config, "sweep.seeds", 1);
    check(cfg.sweep_seeds >= 1, "key 'sweep.seeds' must be at least 1");
    cfg.sweep_order = read_string(config, "sweep.order", "n-major");
    check(cfg.sweep_order == "n-major" || cfg.sweep_order == "dt-major",
          "key 'sweep.order' must be 'n-major' or 'dt-major'");
    if (cfg.command == "sweep") {
        check(!cfg.sweep_dt.empty(), "missing required key 'sweep.dt'");
        check(!cfg.sweep_n.empty(), "missing required key 'sweep.n'");
    }

    cfg.deltas = read_number_array(config, "sensitivity.delta", {});
    for (double d : cfg.deltas) check(d >= 0.0, "key 'sensitivity.delta' entries must be >= 0");
    cfg.n_alpha = read_int(config, "sensitivity.n_alpha", 21);
    check(cfg.n_alpha >= 1 && cfg.n_alpha % 2 == 1,
          "key 'sensitivity.n_alpha' must be odd and positive");
    cfg.quantity = read_string(config, "sensitivity.quantity", "value-at-point");
    check(cfg.quantity == "value-at-point" || cfg.quantity == "max",
          "key 'sensitivity.quantity' must be 'value-at-point' or 'max'");
    cfg.x_star = read_number(config, "sensitivity.x_star", 0.0);
    if (cfg.command == "sensitivity")
        check(!cfg.deltas.empty(), "missing required key 'sensitivity.delta'");

    cfg.burgers_diffusion = read_number(config, "burgers.diffusion", 0.1);
    check(cfg.burgers_diffusion > 0.0, "key 'burgers.diffusion' must be positive");
    cfg.burgers_clamp = read_number(config, "burgers.clamp", 1e-2);
    check(cfg.burgers_clamp > 0.0, "key 'burgers.clamp' must be positive");
    cfg.burgers_paper_scale = read_bool(config, "burgers.paper_scale", false);
    if (cfg.problem == "burgers" && cfg.burgers_paper_scale) {
        // Full-fidelity switch: the reference run at h = 0.004, dt = 2e-6.
        cfg.grid_n = 501;
        cfg.sim_dt = 2e-6;
    }

    cfg.bounds_samples = read_int(config, "bounds.samples", 1000);
    check(cfg.bounds_samples >= 1, "key 'bounds.samples' must be at least 1");
    cfg.bounds_caps = read_number_array(config, "bounds.caps", {0.5, 0.9, 1.5});
    check(!cfg.bounds_caps.empty(), "key 'bounds.caps' must not be empty");
    for (double c : cfg.bounds_caps) check(c > 0.0, "key 'bounds.caps' entries must be positive");
    cfg.bounds_depths = read_int_array(config, "bounds.depths", {2, 3, 4});
    check(!cfg.bounds_depths.empty(), "key 'bounds.depths' must not be empty");
    for (int d : cfg.bounds_depths)
        check(d >= 2, "key 'bounds.depths' entries must be at least 2");
    cfg.bounds_grid_n = read_int(config, "bounds.grid_n", 401);
    check(cfg.bounds_grid_n >= 2, "key 'bounds.grid_n' must be at least 2");
    cfg.bounds_scale = read_number(config, "bounds.scale", 3.0);
    check(cfg.bounds_scale > 0.0, "key 'bounds.scale' must be positive");
    cfg.bounds_tolerance = read_number(config, "bounds.tolerance", 1e-4);
    check(cfg.bounds_tolerance >= 0.0, "key 'bounds.tolerance' must be >= 0");

    return cfg;
}

int planned_sweep_rows(const RunConfig& config) {
    return static_cast<int>(config.sweep_dt.size()) * static_cast<int>(config.sweep_n.size()) *
           config.sweep_seeds;
}

namespace {

// ---------------------------------------------------------------------------
// Command runners. All artifacts land in `out`; each command prints a
// one-line summary on stdout.

int effective_jobs(const RunConfig& cfg) {
    if (cfg.jobs > 0) return cfg.jobs;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

Grid1D make_grid(const RunConfig& cfg) { return Grid1D{cfg.grid_n, cfg.x_min, cfg.x_max}; }

void write_manifest(const std::filesystem::path& out, const RunConfig& cfg) {
    std::ofstream file(out / "manifest.json");
    if (!file) throw NumericError("cannot write " + (out / "manifest.json").string());
    json manifest;
    manifest["schema_version"] = 1;
    manifest["config"] = cfg.to_json();
    file << manifest.dump(2) << '\n';
}

struct CalibratedRun {
    ManufacturedProblem problem;
    Grid1D grid;
    SnapshotData data;
    ResidualProblem residual;
    CalibrationResult result;
};

CalibratedRun run_calibration(const RunConfig& cfg) {
    CalibratedRun run{cfg.manufactured(), make_grid(cfg), {}, {}, {}};
    const SnapshotRequest request{cfg.anchors, cfg.m, cfg.dt};
    run.data = make_snapshots(run.problem, run.grid, request,
                              NoiseSpec{cfg.noise_std, cfg.noise_seed});
    run.residual = make_residual_problem(run.problem, run.data.noisy, cfg.lambda);
    run.result = calibrate(run.residual, cfg.architecture(), cfg.optimizer,
                           derive_seed(cfg.seed, 0), run.problem.exact_field);
    return run;
}

void write_calibration_artifacts(const std::filesystem::path& out, const CalibratedRun& run,
                                 const std::vector<double>* baseline = nullptr) {
    const ErrorReport& err = *run.result.error;
    write_curve_csv(out / "curve.csv", err.xs, err.f_exact, err.f_theta, baseline);
    write_trace_csv(out / "trace.csv", run.result.trace);
    save_network(out / "network.json", run.result.arch, run.result.params);
}

std::string summary_tail(const CalibratedRun& run) {
    const OptimizationTrace& trace = run.result.trace;
    std::string s = "final_loss=" + format_double(trace.final_loss) +
                    " iters=" + std::to_string(trace.iterations) +
                    " stop=" + to_string(trace.stop_reason);
    if (run.result.error)
        s += " linf=" + format_double(run.result.error->linf) +
             " l2=" + format_double(run.result.error->l2);
    return s;
}

int cmd_calibrate(const RunConfig& cfg, const std::filesystem::path& out) {
    const CalibratedRun run = run_calibration(cfg);
    write_calibration_artifacts(out, run);
    std::cout << "calibrate " << cfg.problem << ": " << summary_tail(run) << " out=" << out.string()
              << '\n';
    return 0;
}

int cmd_baseline(const RunConfig& cfg, const std::filesystem::path& out) {
    const CalibratedRun run = run_calibration(cfg);

    OptimizerConfig baseline_cfg = cfg.optimizer;
    baseline_cfg.projection.reset();  // nodal values carry no spectral constraint
    const BaselineResult baseline = baseline_calibrate(run.residual, baseline_cfg);

    write_calibration_artifacts(out, run, &baseline.values);
    write_trace_csv(out / "baseline-trace.csv", baseline.trace);

    const double tv_net = total_variation(run.result.error->f_theta);
    const double tv_baseline = total_variation(baseline.values);
    std::cout << "baseline " << cfg.problem << ": " << summary_tail(run)
              << " tv_net=" << format_double(tv_net)
              << " tv_baseline=" << format_double(tv_baseline)
              << (baseline.underdetermined ? " underdetermined=1" : "")
              << " out=" << out.string() << '\n';
    return 0;
}

int cmd_sensitivity(const RunConfig& cfg, const std::filesystem::path& out) {
    const CalibratedRun run = run_calibration(cfg);
    write_calibration_artifacts(out, run);

    QuantityFunctional functional;
    functional.kind = (cfg.quantity == "max") ? QuantityFunctional::Kind::max_over_domain
                                              : QuantityFunctional::Kind::value_at_point;
    functional.x_star = cfg.x_star;
    const QuantityGrad qg =
        quantity_grad(run.result.params, run.result.arch, functional, run.grid);

    for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
        const SensitivityRegion reg = region(run.result.params, run.result.arch, qg.grad,
                                             run.grid, cfg.deltas[k], cfg.n_alpha);
        const std::string stem = "region-" + std::to_string(k + 1);
        write_region_csv(out / (stem + ".csv"), reg, &run.result.error->f_exact);
        json meta;
        meta["delta"] = cfg.deltas[k];
        meta["n_alpha"] = cfg.n_alpha;
        meta["grad_norm"] = norm2(qg.grad);
        meta["anchor"] = qg.anchor_x;
        std::ofstream mf(out / (stem + ".json"));
        if (!mf) throw NumericError("cannot write " + (out / (stem + ".json")).string());
        mf << meta.dump(2) << '\n';
    }

    std::cout << "sensitivity " << cfg.problem << ": " << summary_tail(run)
              << " anchor=" << format_double(qg.anchor_x)
              << " q=" << format_double(qg.value) << " regions=" << cfg.deltas.size()
              << " out=" << out.string() << '\n';
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out) {
    std::vector<SweepConfig> configs;
    if (cfg.sweep_order == "n-major") {
        for (int n : cfg.sweep_n)
            for (double dt : cfg.sweep_dt) configs.push_back({dt, n});
    } else {
        for (double dt : cfg.sweep_dt)
            for (int n : cfg.sweep_n) configs.push_back({dt, n});
    }

    SweepOptions options;
    options.anchor_times = cfg.anchors;
    options.snapshots_per_group = cfg.m;
    options.n_seeds = cfg.sweep_seeds;
    options.master_seed = cfg.seed;
    options.noise = NoiseSpec{cfg.noise_std, 0};
    options.jobs = effective_jobs(cfg);
    options.arch = cfg.architecture();
    options.optimizer = cfg.optimizer;

    const std::vector<SweepRow> rows = convergence_sweep(cfg.manufactured(), configs, options);
    write_sweep_csv(out / "sweep.csv", rows);

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const SweepRow& r : rows) {
        lo = std::min(lo, r.linf);
        hi = std::max(hi, r.linf);
    }
    std::cout << "sweep " << cfg.problem << ": rows=" << rows.size()
              << " linf_min=" << format_double(lo) << " linf_max=" << format_double(hi)
              << " out=" << out.string() << '\n';
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out) {
    const ManufacturedProblem problem = cfg.manufactured();
    const Grid1D grid = make_grid(cfg);
    const double sim_dt = cfg.sim_dt > 0.0 ? cfg.sim_dt : problem.sim_dt;
    double t_end = cfg.t_end;
    if (t_end <= 0.0)
        t_end = cfg.anchors.back() + (cfg.dt > 0.0 ? (cfg.m - 1) * cfg.dt : 0.0);
    const long long steps = std::llround(t_end / sim_dt);
    if (steps < 1 || std::abs(t_end - static_cast<double>(steps) * sim_dt) > 1e-9 * t_end)
        throw ConfigError("key 'time.t_end' must be a positive multiple of the simulation step");
    if (steps % cfg.save_every != 0)
        throw ConfigError("key 'time.save_every' must divide the simulated step count");

    const Trajectory traj =
        reference_trajectory(problem, grid, sim_dt, static_cast<int>(steps));
    Trajectory kept;
    for (std::size_t k = 0; k < traj.size(); k += cfg.save_every) kept.push_back(traj[k]);
    write_trajectory_csv(out / "trajectory.csv", kept, grid, 0.0, sim_dt * cfg.save_every);
    save_snapshot_pair(out / "final-pair.bin", grid,
                       static_cast<double>(steps - 1) * sim_dt, sim_dt, traj[traj.size() - 2],
                       traj.back());

    std::cout << "simulate " << cfg.problem << ": steps=" << steps
              << " sim_dt=" << format_double(sim_dt) << " frames=" << kept.size()
              << " out=" << out.string() << '\n';
    return 0;
}

int cmd_verify_bounds(const RunConfig& cfg, const std::filesystem::path& out) {
    const std::vector<BoundsCombo> combos =
        derivative_bounds_suite(cfg.bounds_caps, cfg.bounds_depths, cfg.bounds_samples,
                                cfg.bounds_grid_n, cfg.bounds_scale, derive_seed(cfg.seed, 0));
    bool all_ok = true;
    double worst_excess = 0.0;
    json report;
    report["tolerance"] = cfg.bounds_tolerance;
    report["combos"] = json::array();
    for (const BoundsCombo& c : combos) {
        const bool ok = c.max_d1 <= c.bound_d1 + cfg.bounds_tolerance &&
                        c.max_d2 <= c.bound_d2 + cfg.bounds_tolerance;
        all_ok = all_ok && ok;
        worst_excess = std::max({worst_excess, c.max_d1 - c.bound_d1, c.max_d2 - c.bound_d2});
        report["combos"].push_back({{"cap", c.cap},
                                    {"depth", c.depth},
                                    {"samples", c.samples},
                                    {"bound_d1", c.bound_d1},
                                    {"max_d1", c.max_d1},
                                    {"bound_d2", c.bound_d2},
                                    {"max_d2", c.max_d2},
                                    {"ok", ok}});
    }
    report["all_ok"] = all_ok;
    std::ofstream file(out / "bounds.json");
    if (!file) throw NumericError("cannot write " + (out / "bounds.json").string());
    file << report.dump(2) << '\n';

    std::cout << "verify-bounds: combos=" << combos.size()
              << " worst_excess=" << format_double(worst_excess)
              << (all_ok ? " ok" : " VIOLATION") << " out=" << out.string() << '\n';
    if (!all_ok) throw NumericError("derivative bound violated beyond tolerance");
    return 0;
}

std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::string& preset) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    const char* env = std::getenv("PDECALIB_OUT");
    const std::string root = env && *env ? env : "pdecalib-out";
    const std::string tag = preset.empty() ? cfg.problem : preset;
    return std::filesystem::path(root) /
           (cfg.command + "-" + tag + "-seed" + std::to_string(cfg.seed));
}

void deep_merge(json& base, const json& overlay) {
    if (!base.is_object() || !overlay.is_object()) {
        base = overlay;
        return;
    }
    for (const auto& [key, value] : overlay.items()) {
        if (base.contains(key) && base[key].is_object() && value.is_object())
            deep_merge(base[key], value);
        else
            base[key] = value;
    }
}

struct CliFlags {
    std::string config_path;
    std::string preset;
    std::string out;
    std::string problem;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> seeds;
};

void add_common_flags(CLI::App* cmd, CliFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--preset", flags.preset, "named experiment configuration");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--jobs", flags.jobs, "worker pool size (0 = logical cores)");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--set", flags.sets, "dotted-key override, e.g. --set grid.n=640")
        ->take_all();
    cmd->add_option("--problem", flags.problem, "problem kind");
    cmd->add_option("--seeds", flags.seeds, "seeds per sweep configuration");
}

int dispatch(const RunConfig& cfg, const std::string& preset) {
    const std::filesystem::path out = resolve_out_dir(cfg, preset);
    std::filesystem::create_directories(out);
    write_manifest(out, cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "calibrate") return cmd_calibrate(cfg, out);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out);
    if (cfg.command == "sensitivity") return cmd_sensitivity(cfg, out);
    if (cfg.command == "baseline") return cmd_baseline(cfg, out);
    if (cfg.command == "verify-bounds") return cmd_verify_bounds(cfg, out);
    throw ConfigError("missing required key 'command'");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"pdecalib: calibrates hidden coefficient fields in 1D evolution PDEs"};
    app.require_subcommand(0, 1);
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "print preset names and exit");

    CliFlags flags;
    add_common_flags(&app, flags);
    for (const char* name :
         {"simulate", "calibrate", "sweep", "sensitivity", "baseline", "verify-bounds"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common_flags(sub, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (list_presets) {
        for (const std::string& name : preset_names()) std::cout << name << '\n';
        return 0;
    }

    try {
        json tree = json::object();
        if (!flags.preset.empty()) tree = preset_config(flags.preset);
        if (!flags.config_path.empty()) {
            std::ifstream in(flags.config_path);
            if (!in) throw ConfigError("cannot open config file " + flags.config_path);
            json file_tree;
            try {
                in >> file_tree;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("malformed config file: ") + e.what());
            }
            deep_merge(tree, file_tree);
        }
        for (const std::string& s : flags.sets) apply_override(tree, s);
        if (!flags.problem.empty()) tree["problem"] = flags.problem;
        if (flags.seed) tree["seed"] = *flags.seed;
        if (flags.jobs) tree["jobs"] = *flags.jobs;
        if (flags.seeds) tree["sweep"]["seeds"] = *flags.seeds;
        if (!flags.out.empty()) tree["out"] = flags.out;
        const auto subcommands = app.get_subcommands();
        if (!subcommands.empty()) tree["command"] = subcommands.front()->get_name();

        const RunConfig cfg = resolve_config(tree);
        return dispatch(cfg, flags.preset);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace pdecalib
