#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdecalib/field_net.hpp"

namespace pdecalib {

// Differentiable objective: returns the value at x and fills grad (same
// length as x). Must be deterministic for reproducible runs.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

// In-place feasibility map applied to accepted iterates (e.g. the spectral
// projection over network parameters). Must be idempotent.
using Projector = std::function<void(std::span<double>)>;

struct WolfeParams {
    double c1 = 1e-4;        // sufficient-decrease slope fraction
    double c2 = 0.9;         // curvature tolerance, c1 < c2 < 1
    int max_trials = 40;     // objective evaluations per line search
};

struct OptimizerConfig {
    int memory = 10;
    int max_iters = 5000;
    // Stop when |f_new - f_old| <= eps1 * max(|f_old|, 1e-300), checked
    // before the gradient test, or when |grad|_inf <= eps2.
    double eps1 = 1e-12;
    double eps2 = 1e-12;
    WolfeParams wolfe;
    std::optional<ProjectionConstraint> projection;
};

enum class StopReason {
    relative_decrease,
    gradient_norm,
    max_iters,
    line_search_failure,
};

std::string to_string(StopReason reason);

struct OptimizationTrace {
    std::vector<double> losses;      // accepted iterates, losses[0] = f(x0)
    std::vector<double> grad_norms;  // inf-norms, parallel to losses
    StopReason stop_reason = StopReason::max_iters;
    std::vector<double> final_x;
    double final_loss = 0.0;
    int iterations = 0;
};

// Limited-memory BFGS with strong Wolfe line search.
//  - Two-loop recursion over at most config.memory curvature pairs; pairs
//    with s.y <= 1e-10 are discarded.
//  - If a projector is given it is applied to every accepted trial point
//    before the curvature update; steps whose projected point does not
//    decrease f are retried with a halved step, so the accepted loss
//    sequence is non-increasing.
//  - Throws NumericError if the objective returns a non-finite value at x0.
OptimizationTrace minimize(const Objective& objective, std::vector<double> x0,
                           const OptimizerConfig& config, const Projector& projector = {});

// Max relative error between the analytic gradient and central differences,
// over all coordinates (or a seeded random subset of max_coords when the
// dimension is larger). Denominator max(1, |fd|, |analytic|) per coordinate.
double gradient_check(const Objective& objective, std::span<const double> x, double step,
                      int max_coords = 0, std::uint64_t seed = 0);

}  // namespace pdecalib
