#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdecalib/errors.hpp"
#include "pdecalib/forward.hpp"
#include "pdecalib/random.hpp"

using namespace pdecalib;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> sample(const Grid1D& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = f(grid.x(i));
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Heat kernel mode on [-1,1]: u(x,t) = exp(-pi^2 t) sin(pi x) solves
// u_t = u_xx with zero boundary values.
double heat_mode(double x, double t) { return std::exp(-kPi * kPi * t) * std::sin(kPi * x); }

double heat_final_error(int n, double dt, double t_end) {
    const Grid1D grid{n, -1.0, 1.0};
    const std::vector<double> c(grid.n, 1.0);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    const Trajectory traj = simulate_diffusion(
        c, SpaceTimeFn{}, [](double) { return 0.0; }, [](double) { return 0.0; },
        sample(grid, [](double x) { return heat_mode(x, 0.0); }), grid, 0.0, dt, steps);
    return max_abs_diff(traj.back(), sample(grid, [&](double x) { return heat_mode(x, t_end); }));
}

// Standing wave: u(x,t) = cos(pi t) sin(pi x) solves u_tt = u_xx with zero
// boundary values and zero initial velocity.
double wave_final_error(int n, double dt, double t_end) {
    const Grid1D grid{n, -1.0, 1.0};
    const std::vector<double> c(grid.n, 1.0);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    const Trajectory traj =
        simulate_wave(c, sample(grid, [](double x) { return std::sin(kPi * x); }), grid, dt, steps);
    const double scale = std::cos(kPi * t_end);
    return max_abs_diff(traj.back(),
                        sample(grid, [&](double x) { return scale * std::sin(kPi * x); }));
}

}  // namespace

TEST_CASE("grid accessors and validation") {
    const Grid1D grid{5, -1.0, 1.0};
    CHECK(grid.h() == doctest::Approx(0.5).epsilon(1e-16));
    CHECK(grid.x(0) == -1.0);
    CHECK(grid.x(4) == doctest::Approx(1.0).epsilon(1e-16));
    CHECK(grid.x(2) == doctest::Approx(0.0).epsilon(1e-16));
    CHECK_NOTHROW(grid.validate());
    CHECK_THROWS_AS((Grid1D{2, -1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS((Grid1D{5, 1.0, 1.0}).validate(), ConfigError);
}

TEST_CASE("Thomas solve: hand oracle and random diagonally dominant systems") {
    // [[2,-1,0],[-1,2,-1],[0,-1,2]] x = [1,0,1] has the solution [1,1,1].
    const std::vector<double> lower = {-1.0, -1.0};
    const std::vector<double> diag = {2.0, 2.0, 2.0};
    const std::vector<double> upper = {-1.0, -1.0};
    const std::vector<double> rhs = {1.0, 0.0, 1.0};
    const std::vector<double> x = thomas_solve(lower, diag, upper, rhs);
    REQUIRE(x.size() == 3);
    for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    Rng rng(404);
    const int n = 40;
    std::vector<double> lo(n - 1), d(n), up(n - 1), b(n);
    for (int i = 0; i < n - 1; ++i) {
        lo[i] = rng.uniform(-1.0, 1.0);
        up[i] = rng.uniform(-1.0, 1.0);
    }
    for (int i = 0; i < n; ++i) {
        d[i] = 3.0 + rng.uniform(0.0, 1.0);  // strictly dominant
        b[i] = rng.uniform(-2.0, 2.0);
    }
    const std::vector<double> sol = thomas_solve(lo, d, up, b);
    for (int i = 0; i < n; ++i) {
        double r = d[i] * sol[i] - b[i];
        if (i > 0) r += lo[i - 1] * sol[i - 1];
        if (i < n - 1) r += up[i] * sol[i + 1];
        CHECK(std::abs(r) < 1e-12);
    }

    const std::vector<double> sing = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(thomas_solve(lower, sing, upper, rhs), NumericError);
}

TEST_CASE("diffusion step preserves steady constant states") {
    const Grid1D grid{11, -1.0, 1.0};
    const std::vector<double> v(grid.n, 3.25);
    std::vector<double> c(grid.n);
    for (int i = 0; i < grid.n; ++i) c[i] = 1.0 + 0.5 * grid.x(i) * grid.x(i);
    const std::vector<double> zero(grid.n, 0.0);
    const std::vector<double> out = cn_diffusion_step(v, c, zero, zero, 3.25, 3.25, grid, 0.01);
    CHECK(max_abs_diff(out, v) < 1e-13);
}

TEST_CASE("diffusion solver is second order under joint step halving") {
    const double t_end = 0.25;
    const double e1 = heat_final_error(21, 0.01, t_end);
    const double e2 = heat_final_error(41, 0.005, t_end);
    const double e3 = heat_final_error(81, 0.0025, t_end);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.2);
    CHECK(e2 / e3 > 3.0);
    CHECK(e2 / e3 < 5.2);
}

TEST_CASE("diffusion source terms and start offset are honoured") {
    // u(x,t) = t sin(pi x) with c(x) = 1 + x^2/2 forces
    // s(x,t) = sin(pi x) (1 + c(x) pi^2 t); u is linear in t so the remaining
    // error is purely spatial, O(h^2).
    const Grid1D grid{81, -1.0, 1.0};
    std::vector<double> c(grid.n);
    for (int i = 0; i < grid.n; ++i) c[i] = 1.0 + 0.5 * grid.x(i) * grid.x(i);
    const SpaceTimeFn src = [](double x, double t) {
        const double cx = 1.0 + 0.5 * x * x;
        return std::sin(kPi * x) * (1.0 + cx * kPi * kPi * t);
    };
    const double t0 = 0.3;
    const double dt = 0.0125;
    const int steps = 20;  // ends at t = 0.55
    const Trajectory traj = simulate_diffusion(
        c, src, [](double) { return 0.0; }, [](double) { return 0.0; },
        sample(grid, [&](double x) { return t0 * std::sin(kPi * x); }), grid, t0, dt, steps);
    const double t_end = t0 + steps * dt;
    const double err = max_abs_diff(
        traj.back(), sample(grid, [&](double x) { return t_end * std::sin(kPi * x); }));
    CHECK(err < 1e-3);
    REQUIRE(traj.size() == static_cast<std::size_t>(steps + 1));
}

TEST_CASE("wave solver is second order and enforces the CFL bound") {
    const double t_end = 0.5;
    const double e1 = wave_final_error(41, 0.005, t_end);
    const double e2 = wave_final_error(81, 0.0025, t_end);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.2);

    const Grid1D grid{41, -1.0, 1.0};
    const std::vector<double> fast(grid.n, 400.0);  // sqrt(c) dt / h >> 1
    const std::vector<double> u0 = sample(grid, [](double x) { return std::sin(kPi * x); });
    CHECK_THROWS_AS(simulate_wave(fast, u0, grid, 0.01, 4), NumericError);
}

TEST_CASE("wave bootstrap with zero speed keeps the initial state") {
    const Grid1D grid{21, -1.0, 1.0};
    const std::vector<double> c(grid.n, 0.0);
    const std::vector<double> v0 = sample(grid, [](double x) { return x * x; });
    const std::vector<double> v1 = wave_bootstrap(v0, c, grid, 0.01);
    // Interior untouched; the scheme's boundary slots carry the Dirichlet zeros.
    for (int i = 1; i < grid.n - 1; ++i) CHECK(v1[i] == v0[i]);
}

TEST_CASE("Burgers step with zero field reduces to the diffusion step") {
    const Grid1D grid{41, -1.0, 1.0};
    const double diffusion = 0.1;
    const double dt = 0.001;
    const std::vector<double> f(grid.n, 0.0);
    const std::vector<double> v0 =
        sample(grid, [](double x) { return std::exp(-4.0 * x * x); });
    const std::vector<double> zero(grid.n, 0.0);
    const std::vector<double> c(grid.n, diffusion);

    const std::vector<double> via_burgers =
        burgers_step(v0, f, diffusion, v0.front(), v0.back(), grid, dt);
    const std::vector<double> via_cn =
        cn_diffusion_step(v0, c, zero, zero, v0.front(), v0.back(), grid, dt);
    CHECK(max_abs_diff(via_burgers, via_cn) < 1e-12);
}

TEST_CASE("Burgers Newton residual verified against the scheme rows") {
    const Grid1D grid{51, -1.0, 1.0};
    const double diffusion = 0.1;
    const double dt = 0.002;
    const double h = grid.h();
    const std::vector<double> f =
        sample(grid, [](double x) { return -1.0 + std::exp(-(x - 0.5) * (x - 0.5)); });
    const std::vector<double> v =
        sample(grid, [](double x) { return 0.5 + 0.3 * std::cos(kPi * x); });

    const std::vector<double> vn = burgers_step(v, f, diffusion, v.front(), v.back(), grid, dt);
    REQUIRE(vn.size() == v.size());
    CHECK(vn.front() == v.front());
    CHECK(vn.back() == v.back());

    // Independent evaluation of the implicit rows at the returned state.
    const double k = dt / (8.0 * h);
    const double m = diffusion * dt / (2.0 * h * h);
    double worst = 0.0;
    for (int j = 1; j < grid.n - 1; ++j) {
        const double lhs = (k * (2.0 - vn[j + 1] - 2.0 * v[j + 1]) * f[j + 1] - m) * vn[j + 1] +
                           (1.0 + 2.0 * m) * vn[j] +
                           (-k * (2.0 - vn[j - 1] - 2.0 * v[j - 1]) * f[j - 1] - m) * vn[j - 1];
        const double rhs = -k * (v[j + 1] * (2.0 - v[j + 1]) * f[j + 1] -
                                 v[j - 1] * (2.0 - v[j - 1]) * f[j - 1]) +
                           v[j] + m * (v[j + 1] - 2.0 * v[j] + v[j - 1]);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst <= 1e-10);

    NewtonOptions unreachable;
    unreachable.tol = 1e-18;
    unreachable.max_iters = 2;
    CHECK_THROWS_AS(burgers_step(v, f, diffusion, v.front(), v.back(), grid, dt, unreachable),
                    NumericError);
}

TEST_CASE("simulations carry their boundary data") {
    const Grid1D grid{21, -1.0, 1.0};
    const std::vector<double> c(grid.n, 1.0);
    const auto bcl = [](double t) { return 1.0 + t; };
    const auto bcr = [](double t) { return -2.0 * t; };
    const double dt = 0.01;
    const Trajectory traj =
        simulate_diffusion(c, SpaceTimeFn{}, bcl, bcr, std::vector<double>(grid.n, 1.0), grid,
                           0.0, dt, 5);
    REQUIRE(traj.size() == 6);
    for (int s = 1; s <= 5; ++s) {
        CHECK(traj[s].front() == doctest::Approx(bcl(s * dt)).epsilon(1e-15));
        CHECK(traj[s].back() == doctest::Approx(bcr(s * dt)).epsilon(1e-15));
    }
}
