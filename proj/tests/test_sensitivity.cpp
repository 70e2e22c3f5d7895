#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdecalib/errors.hpp"
#include "pdecalib/field_net.hpp"
#include "pdecalib/sensitivity.hpp"

using namespace pdecalib;

namespace {

NetworkArchitecture arch_of(std::vector<int> widths) {
    NetworkArchitecture arch;
    arch.hidden_widths = std::move(widths);
    return arch;
}

// f(x) = w2 tanh(w1 x): strictly monotone when both weights share a sign.
NetworkParams monotone_params(const NetworkArchitecture& arch, double w1, double w2) {
    NetworkParams p = init_params(arch, 0);
    for (auto& w : p.weights)
        for (double& v : w.data) v = 0.0;
    p.weights[0](0, 0) = w1;
    p.weights[1](0, 0) = w2;
    return p;
}

}  // namespace

TEST_CASE("anchored quantity: value and gradient at a fixed point") {
    const NetworkArchitecture arch = arch_of({7, 5});
    const NetworkParams params = init_params(arch, 3);
    const Grid1D grid{41, -1.0, 1.0};
    QuantityFunctional q;
    q.kind = QuantityFunctional::Kind::value_at_point;
    q.x_star = 0.35;

    const QuantityGrad got = quantity_grad(params, arch, q, grid);
    const double xv[1] = {0.35};
    CHECK(got.anchor_x == 0.35);
    CHECK(got.value == forward(params, arch, xv));
    CHECK(got.grad == grad_params(params, arch, xv));
}

TEST_CASE("max-over-domain quantity anchors at the argmax, lowest index on ties") {
    const NetworkArchitecture arch = arch_of({1});
    const Grid1D grid{21, -1.0, 1.0};
    QuantityFunctional q;
    q.kind = QuantityFunctional::Kind::max_over_domain;

    // Increasing field: the maximum sits at the right end.
    const NetworkParams up = monotone_params(arch, 1.3, 2.0);
    CHECK(quantity_grad(up, arch, q, grid).anchor_x == grid.x(grid.n - 1));

    // Decreasing field: left end.
    const NetworkParams down = monotone_params(arch, 1.3, -2.0);
    CHECK(quantity_grad(down, arch, q, grid).anchor_x == grid.x(0));

    // Constant field: every node ties, the scan keeps the first.
    NetworkParams flat = monotone_params(arch, 0.0, 0.0);
    const QuantityGrad tied = quantity_grad(flat, arch, q, grid);
    CHECK(tied.anchor_x == grid.x(0));
}

TEST_CASE("perturbation family: grids, base curve identity, envelope sandwich") {
    const NetworkArchitecture arch = arch_of({6, 6});
    const NetworkParams params = init_params(arch, 11);
    const Grid1D grid{31, -1.0, 1.0};
    QuantityFunctional q;
    q.x_star = 0.0;
    const QuantityGrad qg = quantity_grad(params, arch, q, grid);

    const int n_alpha = 9;
    const double delta = 0.05;
    const SensitivityRegion reg = region(params, arch, qg.grad, grid, delta, n_alpha);

    REQUIRE(static_cast<int>(reg.alphas.size()) == n_alpha);
    REQUIRE(static_cast<int>(reg.curves.size()) == n_alpha);
    REQUIRE(static_cast<int>(reg.xs.size()) == grid.n);
    CHECK(reg.alphas.front() == -delta);
    CHECK(reg.alphas.back() == delta);
    for (int j = 0; j < n_alpha; ++j) {
        CHECK(reg.alphas[j] == -reg.alphas[n_alpha - 1 - j]);
    }
    for (int i = 0; i < grid.n; ++i) CHECK(reg.xs[i] == grid.x(i));

    // The middle curve is the unperturbed network, bit for bit.
    const int mid = (n_alpha - 1) / 2;
    CHECK(reg.alphas[mid] == 0.0);
    for (int i = 0; i < grid.n; ++i) {
        const double xv[1] = {grid.x(i)};
        CHECK(reg.curves[mid][i] == forward(params, arch, xv));
    }

    for (int j = 0; j < n_alpha; ++j) {
        for (int i = 0; i < grid.n; ++i) {
            CHECK(reg.env_min[i] <= reg.curves[j][i]);
            CHECK(reg.env_max[i] >= reg.curves[j][i]);
        }
    }
    // The envelope is attained by some sampled curve at every node.
    for (int i = 0; i < grid.n; ++i) {
        double lo = reg.curves[0][i], hi = reg.curves[0][i];
        for (int j = 1; j < n_alpha; ++j) {
            lo = std::min(lo, reg.curves[j][i]);
            hi = std::max(hi, reg.curves[j][i]);
        }
        CHECK(reg.env_min[i] == lo);
        CHECK(reg.env_max[i] == hi);
    }
}

TEST_CASE("doubling delta with matched refinement nests the envelope exactly") {
    // Both lattices step by delta/5, so the (delta, 11) alphas recur as the
    // central block of the (2 delta, 21) lattice. They even match bitwise:
    // k/5 and k/10 share a significand, and doubling is exact, so the same
    // perturbed parameter vectors are evaluated and the wider envelope must
    // contain the narrower one with no floating-point slack.
    const NetworkArchitecture arch = arch_of({10, 8});
    const NetworkParams params = init_params(arch, 29);
    const Grid1D grid{101, -1.0, 1.0};
    QuantityFunctional q;
    q.x_star = 0.25;
    const QuantityGrad qg = quantity_grad(params, arch, q, grid);

    const double delta = 0.002;
    const SensitivityRegion inner = region(params, arch, qg.grad, grid, delta, 11);
    const SensitivityRegion outer = region(params, arch, qg.grad, grid, 2.0 * delta, 21);

    for (int j = 0; j < 11; ++j) {
        CHECK(inner.alphas[j] == outer.alphas[j + 5]);
    }
    int violations = 0;
    for (int i = 0; i < grid.n; ++i) {
        if (!(outer.env_min[i] <= inner.env_min[i])) ++violations;
        if (!(outer.env_max[i] >= inner.env_max[i])) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("zero delta collapses the envelope onto the base curve") {
    const NetworkArchitecture arch = arch_of({5});
    const NetworkParams params = init_params(arch, 2);
    const Grid1D grid{17, -1.0, 1.0};
    const std::vector<double> grad(arch.param_count(), 1.0);

    const SensitivityRegion reg = region(params, arch, grad, grid, 0.0, 5);
    for (int i = 0; i < grid.n; ++i) {
        const double xv[1] = {grid.x(i)};
        const double base = forward(params, arch, xv);
        CHECK(reg.env_min[i] == base);
        CHECK(reg.env_max[i] == base);
    }
}

TEST_CASE("perturbation family validates its inputs") {
    const NetworkArchitecture arch = arch_of({5});
    const NetworkParams params = init_params(arch, 2);
    const Grid1D grid{17, -1.0, 1.0};
    const std::vector<double> grad(arch.param_count(), 1.0);

    CHECK_THROWS_AS(region(params, arch, grad, grid, 0.01, 4), ConfigError);   // even
    CHECK_THROWS_AS(region(params, arch, grad, grid, 0.01, -1), ConfigError);  // negative
    CHECK_THROWS_AS(region(params, arch, grad, grid, -0.5, 5), ConfigError);   // delta < 0
    const std::vector<double> short_grad(3, 1.0);
    CHECK_THROWS_AS(region(params, arch, short_grad, grid, 0.01, 5), ConfigError);

    // A single sample is legal and gives the base curve.
    const SensitivityRegion single = region(params, arch, grad, grid, 0.01, 1);
    REQUIRE(single.alphas.size() == 1);
    CHECK(single.alphas[0] == 0.0);
}
