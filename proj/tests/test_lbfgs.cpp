#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pdecalib/errors.hpp"
#include "pdecalib/lbfgs.hpp"

using namespace pdecalib;

namespace {

// f(x) = 1/2 sum lambda_i x_i^2 - b_i x_i, minimum at x_i = b_i / lambda_i.
Objective make_quadratic(std::vector<double> lambda, std::vector<double> b) {
    return [lambda = std::move(lambda), b = std::move(b)](std::span<const double> x,
                                                          std::span<double> grad) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            f += 0.5 * lambda[i] * x[i] * x[i] - b[i] * x[i];
            grad[i] = lambda[i] * x[i] - b[i];
        }
        return f;
    };
}

const Objective rosenbrock = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
};

}  // namespace

TEST_CASE("quadratic minimum found quickly and accurately") {
    const std::vector<double> lambda = {1.0, 4.0, 9.0, 0.5, 25.0};
    const std::vector<double> b = {1.0, -2.0, 3.0, 0.25, -5.0};
    const Objective f = make_quadratic(lambda, b);

    OptimizerConfig cfg;
    cfg.wolfe.c2 = 0.1;  // tighter curvature: near-exact line search on quadratics
    const OptimizationTrace trace = minimize(f, std::vector<double>(5, 0.0), cfg);

    CHECK(trace.iterations <= 12);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        CHECK(trace.final_x[i] == doctest::Approx(b[i] / lambda[i]).epsilon(1e-8));
    }
    CHECK(trace.losses.size() == trace.grad_norms.size());
    CHECK(trace.losses.front() == 0.0);  // f(0) for this family
    CHECK(trace.final_loss == trace.losses.back());
}

TEST_CASE("Rosenbrock valley converges to (1,1)") {
    const OptimizationTrace trace =
        minimize(rosenbrock, {-1.2, 1.0}, OptimizerConfig{});
    CHECK(trace.final_x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(trace.final_x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(trace.final_loss < 1e-12);
    CHECK(trace.iterations < 200);
    // Accepted losses never increase.
    for (std::size_t k = 1; k < trace.losses.size(); ++k) {
        CHECK(trace.losses[k] <= trace.losses[k - 1] + 1e-15);
    }
}

TEST_CASE("projector keeps iterates feasible and losses monotone") {
    // Unconstrained minimum (2,2); box projection onto [-1,1]^2 puts the
    // constrained optimum at the corner (1,1).
    const Objective f = [](std::span<const double> x, std::span<double> g) {
        const double dx = x[0] - 2.0;
        const double dy = x[1] - 2.0;
        g[0] = 2.0 * dx;
        g[1] = 2.0 * dy;
        return dx * dx + dy * dy;
    };
    const Projector box = [](std::span<double> x) {
        for (double& v : x) v = std::min(1.0, std::max(-1.0, v));
    };
    const OptimizationTrace trace = minimize(f, {0.0, 0.0}, OptimizerConfig{}, box);
    CHECK(trace.final_x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(trace.final_x[1] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t k = 1; k < trace.losses.size(); ++k) {
        CHECK(trace.losses[k] <= trace.losses[k - 1] + 1e-15);
    }
    CHECK(std::abs(trace.final_x[0]) <= 1.0);
    CHECK(std::abs(trace.final_x[1]) <= 1.0);
}

TEST_CASE("stop reasons") {
    OptimizerConfig budget;
    budget.max_iters = 3;
    const OptimizationTrace capped = minimize(rosenbrock, {-1.2, 1.0}, budget);
    CHECK(capped.stop_reason == StopReason::max_iters);
    CHECK(capped.iterations == 3);

    // Already at a stationary point: the gradient test fires immediately.
    const Objective still = [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
        return 7.0;
    };
    const OptimizationTrace flat = minimize(still, {1.0, 2.0}, OptimizerConfig{});
    CHECK(flat.stop_reason == StopReason::gradient_norm);
    CHECK(flat.final_loss == 7.0);
    CHECK(flat.iterations == 0);

    CHECK(to_string(StopReason::relative_decrease) == "relative_decrease");
    CHECK(to_string(StopReason::gradient_norm) == "gradient_norm");
    CHECK(to_string(StopReason::max_iters) == "max_iters");
    CHECK(to_string(StopReason::line_search_failure) == "line_search_failure");
}

TEST_CASE("relative-decrease stop on a converged run") {
    const Objective f = make_quadratic({2.0, 2.0}, {1.0, 1.0});
    OptimizerConfig cfg;
    cfg.eps2 = 0.0;  // disable the gradient test so the decrease test decides
    const OptimizationTrace trace = minimize(f, {5.0, -3.0}, cfg);
    CHECK(trace.stop_reason == StopReason::relative_decrease);
    CHECK(trace.final_x[0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("non-finite objective at the start throws") {
    const Objective bad = [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(minimize(bad, {0.0}, OptimizerConfig{}), NumericError);
}

TEST_CASE("gradient check flags a corrupted coordinate") {
    const Objective good = [](std::span<const double> x, std::span<double> g) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            f += x[i] * x[i] * x[i];
            g[i] = 3.0 * x[i] * x[i];
        }
        return f;
    };
    const std::vector<double> at = {0.7, -0.4, 1.1};
    CHECK(gradient_check(good, at, 1e-5) < 1e-8);

    const Objective corrupted = [&](std::span<const double> x, std::span<double> g) {
        const double f = good(x, g);
        g[1] += 0.5;
        return f;
    };
    CHECK(gradient_check(corrupted, at, 1e-5) > 0.1);

    // Random-subset mode still sees every coordinate eventually; with
    // max_coords = 1 some seeds miss the broken slot, a full pass never does.
    CHECK(gradient_check(corrupted, at, 1e-5, 3, 7) > 0.1);
}
