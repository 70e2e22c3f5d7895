#include "pdecalib/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "pdecalib/errors.hpp"
#include "pdecalib/random.hpp"

namespace pdecalib {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_away_from_zero(double v, double eps) {
    return v > 0.0 ? std::max(v, eps) : std::min(v, -eps);
}

}  // namespace

ManufacturedProblem diffusion_problem() {
    ManufacturedProblem p;
    p.kind = ProblemKind::diffusion;
    p.name = "diffusion";
    p.exact_field = [](double x) { return 1.0 + std::exp(-(x - 0.5) * (x - 0.5)); };
    p.exact_solution = [](double x, double t) {
        return std::exp(-kPi * kPi * t) * std::sin(kPi * x);
    };
    p.source = [](double x, double t) {
        const double u = std::exp(-kPi * kPi * t) * std::sin(kPi * x);
        const double cx = 1.0 + std::exp(-(x - 0.5) * (x - 0.5));
        return kPi * kPi * cx * u - kPi * kPi * u;
    };
    p.initial = [p](double x) { return p.exact_solution(x, 0.0); };
    p.reference_profile = p.exact_solution;
    p.sim_dt = 1e-4;
    p.field_output = OutputTransform::identity();
    return p;
}

ManufacturedProblem wave_problem_smooth() {
    ManufacturedProblem p;
    p.kind = ProblemKind::wave;
    p.name = "wave-smooth";
    p.exact_field = [](double x) { return 1.0 + std::exp(-(x - 0.5) * (x - 0.5)); };
    p.initial = [](double x) { return std::exp(-10.0 * x * x); };
    p.sim_dt = 1e-4;
    p.field_output = OutputTransform::bounded(0.0, 2.0);
    return p;
}

ManufacturedProblem wave_problem_piecewise() {
    ManufacturedProblem p;
    p.kind = ProblemKind::wave;
    p.name = "wave-piecewise";
    p.exact_field = [](double x) {
        if (x < -0.5) return 2.0;
        if (x < -0.1) return 1.0;
        if (x < 0.1) return 0.2;
        if (x < 0.3) return 1.0;
        return 1.5;
    };
    p.initial = [](double x) { return std::exp(-10.0 * x * x); };
    p.sim_dt = 1e-4;
    p.field_output = OutputTransform::bounded(0.0, 2.0);
    return p;
}

ManufacturedProblem burgers_problem(const BurgersSetup& setup) {
    ManufacturedProblem p;
    p.kind = ProblemKind::burgers;
    p.name = "burgers";
    p.exact_field = [](double x) { return -1.0 + std::exp(-(x - 0.5) * (x - 0.5)); };
    const double c = setup.wave_speed;
    const double d = setup.diffusion;
    const double clamp = setup.clamp;
    // Travelling reference profile; the field factor is clamped away from its
    // zero at x = 1/2 so the division stays finite.
    p.reference_profile = [c, d, clamp](double x, double t) {
        const double f = clamp_away_from_zero(-1.0 + std::exp(-(x - 0.5) * (x - 0.5)), clamp);
        return (c - f) / (2.0 * f) * (-1.0 + (x - c * t) * std::tanh(c - f) / (2.0 * d));
    };
    p.initial = [p](double x) { return p.reference_profile(x, 0.0); };
    p.sim_dt = 2e-5;
    p.diffusion = setup.diffusion;
    p.field_output = OutputTransform::identity();
    return p;
}

namespace {

std::vector<double> sample_field(const ScalarFn& f, const Grid1D& grid) {
    std::vector<double> v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = f(grid.x(i));
    return v;
}

std::vector<double> sample_solution(const SpaceTimeFn& u, const Grid1D& grid, double t) {
    std::vector<double> v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = u(grid.x(i), t);
    return v;
}

}  // namespace

SnapshotData make_snapshots(const ManufacturedProblem& problem, const Grid1D& grid,
                            const SnapshotRequest& request, const NoiseSpec& noise) {
    grid.validate();
    if (request.m < 2) throw ConfigError("snapshot request needs m >= 2 states per group");
    if (!(request.dt > 0.0)) throw ConfigError("snapshot request needs dt > 0");
    if (request.times.empty()) throw ConfigError("snapshot request has no anchor times");

    // Unique observation times, each sampled or simulated once so that
    // overlapping groups share bit-identical (noisy) states.
    std::vector<double> key_times;
    std::vector<std::vector<double>> clean_states;

    if (problem.exact_solution) {
        std::vector<double> wanted;
        for (double t : request.times)
            for (int k = 0; k < request.m; ++k) wanted.push_back(t + k * request.dt);
        std::sort(wanted.begin(), wanted.end());
        for (double t : wanted) {
            if (!key_times.empty() && std::abs(t - key_times.back()) <= 1e-12) continue;
            key_times.push_back(t);
            clean_states.push_back(sample_solution(problem.exact_solution, grid, t));
        }
    } else {
        const double sim_dt = problem.sim_dt;
        if (!(sim_dt > 0.0)) throw ConfigError("problem.sim_dt must be positive");
        const double ratio = request.dt / sim_dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, std::abs(ratio)))
            throw ConfigError("snapshot dt must be a multiple of the simulation dt");

        std::vector<long long> wanted;
        for (double t : request.times) {
            for (int k = 0; k < request.m; ++k) {
                const double tk = t + k * request.dt;
                const long long idx = std::llround(tk / sim_dt);
                if (idx < 0 || std::abs(tk - static_cast<double>(idx) * sim_dt) > 1e-12)
                    throw ConfigError("requested snapshot time is not on the simulation lattice");
                wanted.push_back(idx);
            }
        }
        std::sort(wanted.begin(), wanted.end());
        wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

        const std::vector<double> field = sample_field(problem.exact_field, grid);
        const long long last = wanted.back();
        std::size_t cursor = 0;
        auto collect = [&](long long step, const std::vector<double>& state) {
            while (cursor < wanted.size() && wanted[cursor] == step) {
                key_times.push_back(static_cast<double>(step) * sim_dt);
                clean_states.push_back(state);
                ++cursor;
            }
        };

        if (!problem.initial) throw ConfigError("simulated problem needs initial data");
        std::vector<double> state = sample_field(problem.initial, grid);

        if (problem.kind == ProblemKind::wave) {
            std::vector<double> prev = state;
            collect(0, prev);
            if (last >= 1) {
                std::vector<double> cur = wave_bootstrap(prev, field, grid, sim_dt);
                collect(1, cur);
                for (long long k = 2; k <= last; ++k) {
                    std::vector<double> next = wave_step(prev, cur, field, grid, sim_dt);
                    prev = std::move(cur);
                    cur = std::move(next);
                    collect(k, cur);
                }
            }
        } else if (problem.kind == ProblemKind::burgers) {
            collect(0, state);
            for (long long k = 1; k <= last; ++k) {
                const double t1 = static_cast<double>(k) * sim_dt;
                const double bl = problem.reference_profile ? problem.reference_profile(grid.x_min, t1) : 0.0;
                const double br = problem.reference_profile ? problem.reference_profile(grid.x_max, t1) : 0.0;
                state = burgers_step(state, field, problem.diffusion, bl, br, grid, sim_dt);
                collect(k, state);
            }
        } else {
            collect(0, state);
            std::vector<double> src0(grid.n), src1(grid.n);
            for (long long k = 1; k <= last; ++k) {
                const double t0 = static_cast<double>(k - 1) * sim_dt;
                const double t1 = static_cast<double>(k) * sim_dt;
                for (int i = 0; i < grid.n; ++i) {
                    src0[i] = problem.source ? problem.source(grid.x(i), t0) : 0.0;
                    src1[i] = problem.source ? problem.source(grid.x(i), t1) : 0.0;
                }
                const double bl = problem.reference_profile ? problem.reference_profile(grid.x_min, t1) : 0.0;
                const double br = problem.reference_profile ? problem.reference_profile(grid.x_max, t1) : 0.0;
                state = cn_diffusion_step(state, field, src0, src1, bl, br, grid, sim_dt);
                collect(k, state);
            }
        }
        if (cursor != wanted.size())
            throw NumericError("simulation did not reach all requested snapshot times");
    }

    std::vector<std::vector<double>> noisy_states = clean_states;
    if (noise.stddev > 0.0) {
        Rng rng(noise.seed);
        for (std::vector<double>& s : noisy_states)
            for (double& v : s) v += noise.stddev * rng.gaussian();
    }

    auto find_state = [&](double t) -> std::size_t {
        for (std::size_t i = 0; i < key_times.size(); ++i)
            if (std::abs(key_times[i] - t) <= 1e-12) return i;
        throw NumericError("internal snapshot lookup failed");
    };

    SnapshotData out;
    for (SnapshotSet* set : {&out.noisy, &out.clean}) {
        set->grid = grid;
        set->dt = request.dt;
        set->noise = {noise.stddev, noise.seed};
    }
    out.clean.noise = {0.0, 0};
    for (double t : request.times) {
        SnapshotGroup noisy_group{t, {}}, clean_group{t, {}};
        for (int k = 0; k < request.m; ++k) {
            const std::size_t idx = find_state(t + k * request.dt);
            noisy_group.snaps.push_back(noisy_states[idx]);
            clean_group.snaps.push_back(clean_states[idx]);
        }
        out.noisy.groups.push_back(std::move(noisy_group));
        out.clean.groups.push_back(std::move(clean_group));
    }
    return out;
}

ResidualProblem make_residual_problem(const ManufacturedProblem& problem, SnapshotSet data,
                                      double lambda) {
    ResidualProblem rp;
    rp.kind = problem.kind;
    rp.data = std::move(data);
    rp.source = problem.source;
    rp.diffusion = problem.diffusion;
    rp.lambda = lambda;
    return rp;
}

double ErrorReport::linf_on(double lo, double hi) const {
    double m = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] >= lo && xs[i] <= hi) m = std::max(m, abs_err[i]);
    return m;
}

ErrorReport error_report(const ScalarFn& exact_field, const NetworkArchitecture& arch,
                         const NetworkParams& params, const Grid1D& grid) {
    grid.validate();
    NetworkEvaluator eval(arch, params);
    ErrorReport report;
    report.xs.resize(grid.n);
    report.f_exact.resize(grid.n);
    report.f_theta.resize(grid.n);
    report.abs_err.resize(grid.n);
    double sum_sq = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        report.xs[i] = x;
        report.f_exact[i] = exact_field(x);
        report.f_theta[i] = eval.value(x);
        report.abs_err[i] = std::abs(report.f_theta[i] - report.f_exact[i]);
        if (i >= 1 && i <= grid.n - 2) {
            report.linf = std::max(report.linf, report.abs_err[i]);
            sum_sq += report.abs_err[i] * report.abs_err[i];
        }
    }
    report.l2 = std::sqrt(sum_sq);
    return report;
}

CalibrationResult calibrate(const ResidualProblem& problem, const NetworkArchitecture& arch,
                            const OptimizerConfig& config, std::uint64_t init_seed,
                            const ScalarFn& exact_field) {
    arch.validate();
    NetworkParams start = init_params(arch, init_seed);
    if (config.projection && config.projection->enabled)
        start = project(start, *config.projection);

    Objective objective = [&problem, &arch](std::span<const double> theta,
                                            std::span<double> grad) -> double {
        LossAndGrad lg = loss_and_grad(problem, arch, theta);
        std::copy(lg.grad.begin(), lg.grad.end(), grad.begin());
        return lg.loss;
    };

    Projector projector;
    if (config.projection && config.projection->enabled) {
        const ProjectionConstraint constraint = *config.projection;
        const NetworkArchitecture arch_copy = arch;
        projector = [arch_copy, constraint](std::span<double> theta) {
            NetworkParams p = project(unflatten(arch_copy, theta), constraint);
            const std::vector<double> flat = flatten(p);
            std::copy(flat.begin(), flat.end(), theta.begin());
        };
    }

    CalibrationResult result;
    result.arch = arch;
    result.trace = minimize(objective, flatten(start), config, projector);
    result.params = unflatten(arch, result.trace.final_x);

    NetworkEvaluator eval(arch, result.params);
    std::vector<double> values(problem.data.grid.n);
    for (int i = 0; i < problem.data.grid.n; ++i) values[i] = eval.value(problem.data.grid.x(i));
    const std::vector<std::vector<double>> residuals = scheme_residuals(problem, values);
    for (const std::vector<double>& r : residuals)
        for (double v : r) result.max_abs_residual = std::max(result.max_abs_residual, std::abs(v));

    if (exact_field)
        result.error = error_report(exact_field, arch, result.params, problem.data.grid);
    return result;
}

std::vector<SweepRow> convergence_sweep(const ManufacturedProblem& problem,
                                        const std::vector<SweepConfig>& configs,
                                        const SweepOptions& options) {
    if (configs.empty()) throw ConfigError("sweep has no configurations");
    if (options.n_seeds < 1) throw ConfigError("sweep needs at least one seed");
    const std::size_t total = configs.size() * static_cast<std::size_t>(options.n_seeds);

    std::vector<SweepRow> rows(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto run_job = [&](std::size_t job) {
        const std::size_t config_index = job / options.n_seeds;
        const std::size_t seed_index = job % options.n_seeds;
        const SweepConfig& cfg = configs[config_index];
        const Grid1D grid{cfg.n, problem.x_min, problem.x_max};

        const std::uint64_t job_seed = derive_seed(options.master_seed, job);
        NoiseSpec noise = options.noise;
        noise.seed = derive_seed(job_seed, 1);

        const SnapshotRequest request{options.anchor_times, options.snapshots_per_group, cfg.dt};
        SnapshotData data = make_snapshots(problem, grid, request, noise);
        const ResidualProblem rp = make_residual_problem(problem, std::move(data.noisy), 0.0);
        const CalibrationResult result =
            calibrate(rp, options.arch, options.optimizer, job_seed, problem.exact_field);

        SweepRow row;
        row.dt = cfg.dt;
        row.h = grid.h();
        row.n = cfg.n;
        row.seed = seed_index;
        row.linf = result.error ? result.error->linf : 0.0;
        row.l2 = result.error ? result.error->l2 : 0.0;
        row.stop_reason = to_string(result.trace.stop_reason);
        row.iters = result.trace.iterations;
        row.final_loss = result.trace.final_loss;
        rows[job] = std::move(row);
    };

    auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total || failed.load()) break;
            try {
                run_job(job);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failed.exchange(true)) failure_message = e.what();
                break;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(total)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw NumericError("sweep job failed: " + failure_message);
    return rows;
}

double fit_loglog_slope(const std::vector<double>& steps, const std::vector<double>& errors) {
    if (steps.size() != errors.size() || steps.size() < 2)
        throw ConfigError("slope fit needs at least two (step, error) pairs");
    const std::size_t n = steps.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(steps[i]);
        ly[i] = std::log(errors[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (lx[i] - mx) * (ly[i] - my);
        var += (lx[i] - mx) * (lx[i] - mx);
    }
    return cov / var;
}

double consistency_check(const ManufacturedProblem& problem, const Grid1D& grid,
                         const SnapshotRequest& request) {
    SnapshotData data = make_snapshots(problem, grid, request, NoiseSpec{0.0, 0});
    const ResidualProblem rp = make_residual_problem(problem, std::move(data.clean), 0.0);
    const std::vector<double> field = sample_field(problem.exact_field, grid);
    const std::vector<std::vector<double>> residuals = scheme_residuals(rp, field);
    double worst = 0.0;
    for (const std::vector<double>& r : residuals)
        for (double v : r) worst = std::max(worst, std::abs(v));
    return worst;
}

DiagnosticConstants estimate_diagnostics(const ManufacturedProblem& problem,
                                         const NetworkArchitecture& arch,
                                         const NetworkParams& params, double x_lo, double x_hi,
                                         double t0, double t1, int base_n) {
    if (!problem.exact_solution)
        throw ConfigError("diagnostics need a closed-form solution");
    if (!(x_lo < x_hi)) throw ConfigError("diagnostics window requires x_lo < x_hi");

    const int n_x = 10 * std::max(base_n - 1, 1) + 1;
    const int n_t = (t1 > t0) ? 11 : 1;
    const double fd2 = 1e-3;  // second-derivative stencil width
    const double fd4 = 1e-2;  // fourth-derivative stencil width

    NetworkEvaluator eval(arch, params);
    DiagnosticConstants out;
    out.delta2 = std::numeric_limits<double>::infinity();
    bool pos = false, neg = false;

    for (int it = 0; it < n_t; ++it) {
        const double t = (n_t == 1) ? t0 : t0 + (t1 - t0) * it / (n_t - 1);
        for (int ix = 0; ix < n_x; ++ix) {
            const double x = x_lo + (x_hi - x_lo) * ix / (n_x - 1);
            const auto& u = problem.exact_solution;
            const double uxx = (u(x + fd2, t) - 2.0 * u(x, t) + u(x - fd2, t)) / (fd2 * fd2);
            const double uxxxx = (u(x + 2 * fd4, t) - 4.0 * u(x + fd4, t) + 6.0 * u(x, t) -
                                  4.0 * u(x - fd4, t) + u(x - 2 * fd4, t)) /
                                 (fd4 * fd4 * fd4 * fd4);
            out.delta2 = std::min(out.delta2, std::abs(uxx));
            out.delta4 = std::max(out.delta4, std::abs(uxxxx));
            if (uxx > 0.0) pos = true;
            if (uxx < 0.0) neg = true;
        }
    }
    if (pos && neg) out.delta2 = 0.0;

    for (int ix = 0; ix < n_x; ++ix) {
        const double x = x_lo + (x_hi - x_lo) * ix / (n_x - 1);
        out.f0_max = std::max(out.f0_max, std::abs(eval.value(x)));
        const double arr[1] = {x};
        const Matrix h = second_deriv_input(params, arch, arr);
        out.f2_net = std::max(out.f2_net, std::abs(h(0, 0)));
        const double fxx = (problem.exact_field(x + fd2) - 2.0 * problem.exact_field(x) +
                            problem.exact_field(x - fd2)) /
                           (fd2 * fd2);
        out.f2_exact = std::max(out.f2_exact, std::abs(fxx));
    }
    return out;
}

TheoremBound theorem_bound(const DiagnosticConstants& constants, double c1_const,
                           double eps_opt, double eps_o, double dt, double h, double observed) {
    TheoremBound out;
    out.observed = observed;
    if (!(constants.delta2 > 0.0)) return out;
    out.gate_h_max = std::sqrt(6.0 * constants.delta2 / constants.delta4);
    if (!(h < out.gate_h_max)) return out;
    out.applicable = true;
    const double d2 = constants.delta2;
    out.rhs = 2.0 * c1_const / d2 * dt * dt +
              (2.0 * c1_const / d2 + 0.5 * (constants.f2_net + constants.f2_exact)) * h * h +
              2.0 / d2 * eps_opt + 4.0 / d2 * (1.0 / dt + 2.0 * constants.f0_max / (h * h)) * eps_o;
    out.satisfied = observed <= out.rhs;
    return out;
}

BaselineResult baseline_calibrate(const ResidualProblem& problem, const OptimizerConfig& config,
                                  double init_value) {
    LeastSquaresProblem lsq = least_squares_problem(problem);
    std::vector<double> start(problem.data.grid.n, init_value);
    BaselineResult out;
    out.underdetermined = lsq.underdetermined;
    out.trace = minimize(lsq.objective, std::move(start), config);
    out.values = out.trace.final_x;
    return out;
}

double total_variation(std::span<const double> values) {
    double tv = 0.0;
    for (std::size_t i = 1; i + 2 < values.size(); ++i)
        tv += std::abs(values[i + 1] - values[i]);
    return tv;
}

Trajectory reference_trajectory(const ManufacturedProblem& problem, const Grid1D& grid,
                                double sim_dt, int steps) {
    grid.validate();
    if (!(sim_dt > 0.0)) throw ConfigError("reference trajectory needs sim_dt > 0");
    if (steps < 0) throw ConfigError("reference trajectory needs steps >= 0");

    const std::vector<double> field = sample_field(problem.exact_field, grid);
    std::vector<double> u0;
    if (problem.initial)
        u0 = sample_field(problem.initial, grid);
    else if (problem.exact_solution)
        u0 = sample_solution(problem.exact_solution, grid, 0.0);
    else
        throw ConfigError("problem has neither initial data nor a closed-form solution");

    const SpaceTimeFn profile =
        problem.reference_profile ? problem.reference_profile : problem.exact_solution;
    auto bc = [&profile](double xb) -> BoundaryFn {
        if (!profile) return [](double) { return 0.0; };
        return [profile, xb](double t) { return profile(xb, t); };
    };

    switch (problem.kind) {
        case ProblemKind::diffusion:
            return simulate_diffusion(field, problem.source, bc(grid.x_min), bc(grid.x_max),
                                      std::move(u0), grid, 0.0, sim_dt, steps);
        case ProblemKind::wave:
            return simulate_wave(field, std::move(u0), grid, sim_dt, steps);
        case ProblemKind::burgers:
            return simulate_burgers(field, problem.diffusion, bc(grid.x_min), bc(grid.x_max),
                                    std::move(u0), grid, 0.0, sim_dt, steps);
    }
    throw ConfigError("unknown problem kind");
}

std::vector<BoundsCombo> derivative_bounds_suite(std::span<const double> caps,
                                                 std::span<const int> depths, int total_samples,
                                                 int grid_n, double scale, std::uint64_t seed) {
    if (caps.empty() || depths.empty())
        throw ConfigError("bounds suite needs at least one cap and one depth");
    if (total_samples < 1) throw ConfigError("bounds suite needs total_samples >= 1");
    if (grid_n < 2) throw ConfigError("bounds suite needs grid_n >= 2");

    const int combos = static_cast<int>(caps.size() * depths.size());
    std::vector<BoundsCombo> out;
    out.reserve(combos);
    std::uint64_t draw = 0;
    int index = 0;
    for (const double cap : caps) {
        for (const int depth : depths) {
            if (depth < 2) throw ConfigError("bounds suite depth must be at least 2");
            BoundsCombo combo;
            combo.cap = cap;
            combo.depth = depth;
            combo.samples = total_samples / combos + (index < total_samples % combos ? 1 : 0);
            ++index;

            NetworkArchitecture arch;
            arch.hidden_widths.assign(depth - 1, 20);
            const ProjectionConstraint constraint{cap, true};
            const DerivativeBounds bounds = derivative_bounds(arch, constraint);
            combo.bound_d1 = bounds.first_order;
            combo.bound_d2 = bounds.second_order;

            for (int s = 0; s < combo.samples; ++s) {
                NetworkParams params = init_params(arch, derive_seed(seed, 2 * draw));
                // Scale up and randomize biases so the projection genuinely
                // bites instead of passing untouched parameters through.
                Rng bias_rng(derive_seed(seed, 2 * draw + 1));
                ++draw;
                for (Matrix& w : params.weights)
                    for (double& v : w.data) v *= scale;
                for (std::vector<double>& b : params.biases)
                    for (double& v : b) v = bias_rng.uniform(-1.0, 1.0);
                params = project(params, constraint);

                for (int i = 0; i < grid_n; ++i) {
                    const double x[1] = {-1.0 + 2.0 * i / (grid_n - 1)};
                    combo.max_d1 =
                        std::max(combo.max_d1, std::abs(grad_input(params, arch, x)[0]));
                    combo.max_d2 =
                        std::max(combo.max_d2, std::abs(second_deriv_input(params, arch, x)(0, 0)));
                }
            }
            out.push_back(combo);
        }
    }
    return out;
}

}  // namespace pdecalib
