#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdecalib/field_net.hpp"
#include "pdecalib/forward.hpp"
#include "pdecalib/lbfgs.hpp"
#include "pdecalib/residual.hpp"

namespace pdecalib {

using ScalarFn = std::function<double(double)>;

// One calibration benchmark: the governing equation, the hidden coefficient
// field, and either a closed-form solution or the data needed to simulate a
// reference trajectory from t = 0.
struct ManufacturedProblem {
    ProblemKind kind = ProblemKind::diffusion;
    std::string name;
    double x_min = -1.0;
    double x_max = 1.0;
    ScalarFn exact_field;          // the coefficient to recover
    SpaceTimeFn exact_solution;    // u(x,t) when available, else empty
    SpaceTimeFn source;            // diffusion source term
    ScalarFn initial;              // u(x,0) for simulated problems
    SpaceTimeFn reference_profile; // Dirichlet data for simulated problems
    double sim_dt = 1e-4;          // data-generation step
    double diffusion = 0.0;        // burgers viscosity
    OutputTransform field_output;  // recommended network output transform
};

struct BurgersSetup {
    double wave_speed = 1.0;   // the free constant in the reference profile
    double clamp = 1e-2;       // keeps the profile's f-denominator away from 0
    double diffusion = 0.1;
};

ManufacturedProblem diffusion_problem();
ManufacturedProblem wave_problem_smooth();     // c(x) = 1 + exp(-(x-1/2)^2)
ManufacturedProblem wave_problem_piecewise();  // five-level staircase field
ManufacturedProblem burgers_problem(const BurgersSetup& setup = {});

// Gaussian observation noise, i.i.d. per grid value. Shared snapshots across
// overlapping groups receive identical noise.
struct NoiseSpec {
    double stddev = 0.0;
    std::uint64_t seed = 0;
};

// Groups of m snapshots spaced by dt starting at each anchor time.
struct SnapshotRequest {
    std::vector<double> times;
    int m = 2;
    double dt = 0.0;
};

struct SnapshotData {
    SnapshotSet noisy;
    SnapshotSet clean;
};

// Closed-form problems are sampled exactly; otherwise a fine simulation at
// problem.sim_dt is sliced. Every requested time must then sit on the
// simulation lattice (|t - k*sim_dt| <= 1e-12) and sim_dt must divide
// request.dt.
SnapshotData make_snapshots(const ManufacturedProblem& problem, const Grid1D& grid,
                            const SnapshotRequest& request, const NoiseSpec& noise);

// Residual problem over a snapshot set, wired with the problem's source and
// viscosity.
ResidualProblem make_residual_problem(const ManufacturedProblem& problem, SnapshotSet data,
                                      double lambda);

// Pointwise recovery error against the exact field at the grid nodes.
// linf/l2 are taken over the interior [x_min + h, x_max - h]; l2 is the
// Euclidean norm of the interior error vector.
struct ErrorReport {
    double linf = 0.0;
    double l2 = 0.0;
    std::vector<double> xs;       // all grid nodes
    std::vector<double> f_exact;
    std::vector<double> f_theta;
    std::vector<double> abs_err;

    double linf_on(double lo, double hi) const;  // restricted to xs in [lo, hi]
};

ErrorReport error_report(const ScalarFn& exact_field, const NetworkArchitecture& arch,
                         const NetworkParams& params, const Grid1D& grid);

struct CalibrationResult {
    NetworkArchitecture arch;
    NetworkParams params;
    OptimizationTrace trace;
    std::optional<ErrorReport> error;
    double max_abs_residual = 0.0;  // per-point residual at the optimum
};

// Fits the network to the scheme residuals: Glorot init from init_seed,
// projected L-BFGS when config.projection is set, error metrics when the
// exact field is supplied.
CalibrationResult calibrate(const ResidualProblem& problem, const NetworkArchitecture& arch,
                            const OptimizerConfig& config, std::uint64_t init_seed,
                            const ScalarFn& exact_field = {});

// One grid/step combination inside a sweep.
struct SweepConfig {
    double dt = 0.0;
    int n = 0;
};

struct SweepRow {
    double dt = 0.0;
    double h = 0.0;
    int n = 0;
    std::uint64_t seed = 0;
    double linf = 0.0;
    double l2 = 0.0;
    std::string stop_reason;
    int iters = 0;
    double final_loss = 0.0;
};

struct SweepOptions {
    std::vector<double> anchor_times = {0.1};
    int snapshots_per_group = 2;
    int n_seeds = 1;
    std::uint64_t master_seed = 0;
    NoiseSpec noise;     // stddev 0 keeps the sweep noiseless
    int jobs = 1;
    NetworkArchitecture arch;
    OptimizerConfig optimizer;
};

// Calibrates every (config, seed) pair. Jobs run on a bounded worker pool;
// each job derives its own seeds from (master_seed, job index) and rows come
// back in deterministic config-major order regardless of worker count.
std::vector<SweepRow> convergence_sweep(const ManufacturedProblem& problem,
                                        const std::vector<SweepConfig>& configs,
                                        const SweepOptions& options);

// Least-squares slope of log(err) against log(dt) or log(h).
double fit_loglog_slope(const std::vector<double>& steps, const std::vector<double>& errors);

// Max interior scheme residual when the exact field and exact (noiseless)
// data are plugged in; the discretization consistency level.
double consistency_check(const ManufacturedProblem& problem, const Grid1D& grid,
                         const SnapshotRequest& request);

// Constants entering the recovery bound, estimated on a 10x refined grid
// over the window [x_lo, x_hi] x [t0, t1].
struct DiagnosticConstants {
    double delta2 = 0.0;        // min |u_xx|; 0 when u_xx changes sign
    double delta4 = 0.0;        // max |u_xxxx|
    double f0_max = 0.0;        // max |f_theta|
    double f2_net = 0.0;        // max |f_theta''|
    double f2_exact = 0.0;      // max |exact field''|
};

DiagnosticConstants estimate_diagnostics(const ManufacturedProblem& problem,
                                         const NetworkArchitecture& arch,
                                         const NetworkParams& params, double x_lo, double x_hi,
                                         double t0, double t1, int base_n);

// A priori recovery bound
//   rhs = 2 C1/d2 dt^2 + (2 C1/d2 + (F2 + F2x)/2) h^2 + 2/d2 eps_opt
//         + 4/d2 (1/dt + 2 F0/h^2) eps_o
// valid when d2 > 0 and h < sqrt(6 d2 / d4) (the gate).
struct TheoremBound {
    bool applicable = false;
    double gate_h_max = 0.0;
    double rhs = 0.0;
    double observed = 0.0;
    bool satisfied = false;
};

TheoremBound theorem_bound(const DiagnosticConstants& constants, double c1_const,
                           double eps_opt, double eps_o, double dt, double h, double observed);

// Full trajectory of the problem's scheme from t = 0: steps+1 states at
// multiples of sim_dt, using the problem's field, source, boundary and
// initial data. Closed-form problems are simulated too (this is the
// numerical reference, not the analytic solution).
Trajectory reference_trajectory(const ManufacturedProblem& problem, const Grid1D& grid,
                                double sim_dt, int steps);

// Randomized audit of the projected-network derivative bounds: for every
// (cap, depth) combination, draws Glorot nets (hidden width 20), scales the
// weights by `scale` so the projection actually bites, projects, and records
// the largest |f'| and |f''| sampled on a uniform grid of grid_n points over
// [-1, 1] next to the analytic bounds.
struct BoundsCombo {
    double cap = 0.0;
    int depth = 0;  // number of weight matrices n_l
    int samples = 0;
    double bound_d1 = 0.0;
    double bound_d2 = 0.0;
    double max_d1 = 0.0;
    double max_d2 = 0.0;
};

std::vector<BoundsCombo> derivative_bounds_suite(std::span<const double> caps,
                                                 std::span<const int> depths, int total_samples,
                                                 int grid_n, double scale, std::uint64_t seed);

// Pointwise least-squares baseline over the nodal field values, optimized
// with the same L-BFGS. Underdetermined data is flagged, not an error.
struct BaselineResult {
    std::vector<double> values;
    bool underdetermined = false;
    OptimizationTrace trace;
};

BaselineResult baseline_calibrate(const ResidualProblem& problem, const OptimizerConfig& config,
                                  double init_value = 0.0);

// Sum of |v_{i+1} - v_i| over the interior node range.
double total_variation(std::span<const double> values);

}  // namespace pdecalib
