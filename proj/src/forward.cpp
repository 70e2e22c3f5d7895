#include "pdecalib/forward.hpp"

#include <algorithm>
#include <cmath>

#include "pdecalib/errors.hpp"
#include "pdecalib/linalg.hpp"

namespace pdecalib {

void Grid1D::validate() const {
    if (n < 3) throw ConfigError("grid.n must be at least 3");
    if (!(x_min < x_max)) throw ConfigError("grid requires x_min < x_max");
}

std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n - 1 || upper.size() != n - 1 || rhs.size() != n)
        throw ConfigError("tridiagonal system has inconsistent sizes");

    std::vector<double> c_star(n, 0.0), d_star(n, 0.0);
    double pivot = diag[0];
    if (std::abs(pivot) < 1e-14) throw NumericError("tridiagonal solve: zero pivot at row 0");
    c_star[0] = upper.empty() ? 0.0 : upper[0] / pivot;
    d_star[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i - 1] * c_star[i - 1];
        if (std::abs(pivot) < 1e-14)
            throw NumericError("tridiagonal solve: zero pivot at row " + std::to_string(i));
        if (i < n - 1) c_star[i] = upper[i] / pivot;
        d_star[i] = (rhs[i] - lower[i - 1] * d_star[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d_star[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d_star[i] - c_star[i] * x[i + 1];
    return x;
}

std::vector<double> cn_diffusion_step(std::span<const double> v, std::span<const double> c,
                                      std::span<const double> src0, std::span<const double> src1,
                                      double bc_left, double bc_right, const Grid1D& grid,
                                      double dt) {
    grid.validate();
    const int n = grid.n;
    if (static_cast<int>(v.size()) != n || static_cast<int>(c.size()) != n ||
        static_cast<int>(src0.size()) != n || static_cast<int>(src1.size()) != n)
        throw ConfigError("diffusion step: state/coefficient size mismatch");
    if (!(dt > 0.0)) throw ConfigError("diffusion step requires dt > 0");

    const double h = grid.h();
    const double h2 = h * h;
    std::vector<double> lower(n - 1, 0.0), diag(n, 0.0), upper(n - 1, 0.0), rhs(n, 0.0);

    diag[0] = 1.0;
    rhs[0] = bc_left;
    diag[n - 1] = 1.0;
    rhs[n - 1] = bc_right;
    for (int i = 1; i < n - 1; ++i) {
        const double r = c[i] * dt / (2.0 * h2);
        lower[i - 1] = -r;
        diag[i] = 1.0 + 2.0 * r;
        upper[i] = -r;
        rhs[i] = v[i] + r * (v[i + 1] - 2.0 * v[i] + v[i - 1]) + 0.5 * dt * (src0[i] + src1[i]);
    }
    return thomas_solve(lower, diag, upper, rhs);
}

std::vector<double> wave_step(std::span<const double> v_old, std::span<const double> v_cur,
                              std::span<const double> c, const Grid1D& grid, double dt) {
    grid.validate();
    const int n = grid.n;
    if (static_cast<int>(v_old.size()) != n || static_cast<int>(v_cur.size()) != n ||
        static_cast<int>(c.size()) != n)
        throw ConfigError("wave step: state/coefficient size mismatch");
    if (!(dt > 0.0)) throw ConfigError("wave step requires dt > 0");
    const double h = grid.h();
    const double c_max = *std::max_element(c.begin(), c.end());
    if (c_max * dt / h > 1.0) throw NumericError("wave step violates the CFL condition");

    std::vector<double> v_next(n, 0.0);
    const double r = dt * dt / (h * h);
    for (int i = 1; i < n - 1; ++i)
        v_next[i] =
            2.0 * v_cur[i] - v_old[i] + r * c[i] * (v_cur[i + 1] - 2.0 * v_cur[i] + v_cur[i - 1]);
    return v_next;
}

std::vector<double> wave_bootstrap(std::span<const double> v0, std::span<const double> c,
                                   const Grid1D& grid, double dt) {
    grid.validate();
    const int n = grid.n;
    if (static_cast<int>(v0.size()) != n || static_cast<int>(c.size()) != n)
        throw ConfigError("wave bootstrap: state/coefficient size mismatch");
    const double h2 = grid.h() * grid.h();
    std::vector<double> v1(n, 0.0);
    for (int i = 1; i < n - 1; ++i)
        v1[i] = v0[i] + 0.5 * dt * dt * c[i] * (v0[i + 1] - 2.0 * v0[i] + v0[i - 1]) / h2;
    return v1;
}

namespace {

// Interior scheme rows F(v_new) = 0 for the implicit conservative step.
void burgers_rows(std::span<const double> v_new, std::span<const double> v_old,
                  std::span<const double> f, double kappa, double mu,
                  std::span<double> residual) {
    const int n = static_cast<int>(v_new.size());
    for (int j = 1; j < n - 1; ++j) {
        const double lhs =
            (kappa * (2.0 - v_new[j + 1] - 2.0 * v_old[j + 1]) * f[j + 1] - mu) * v_new[j + 1] +
            (1.0 + 2.0 * mu) * v_new[j] +
            (-kappa * (2.0 - v_new[j - 1] - 2.0 * v_old[j - 1]) * f[j - 1] - mu) * v_new[j - 1];
        const double rhs =
            -kappa * (v_old[j + 1] * (2.0 - v_old[j + 1]) * f[j + 1] -
                      v_old[j - 1] * (2.0 - v_old[j - 1]) * f[j - 1]) +
            v_old[j] + mu * (v_old[j + 1] - 2.0 * v_old[j] + v_old[j - 1]);
        residual[j] = lhs - rhs;
    }
}

}  // namespace

std::vector<double> burgers_step(std::span<const double> v, std::span<const double> f,
                                 double diffusion, double bc_left, double bc_right,
                                 const Grid1D& grid, double dt, const NewtonOptions& newton) {
    grid.validate();
    const int n = grid.n;
    if (static_cast<int>(v.size()) != n || static_cast<int>(f.size()) != n)
        throw ConfigError("burgers step: state/coefficient size mismatch");
    if (!(dt > 0.0)) throw ConfigError("burgers step requires dt > 0");
    if (!(diffusion >= 0.0)) throw ConfigError("burgers step requires diffusion >= 0");

    const double h = grid.h();
    const double kappa = dt / (8.0 * h);
    const double mu = diffusion * dt / (2.0 * h * h);

    std::vector<double> v_new(v.begin(), v.end());
    v_new[0] = bc_left;
    v_new[n - 1] = bc_right;

    std::vector<double> residual(n, 0.0);
    std::vector<double> lower(n - 3, 0.0), diag(n - 2, 0.0), upper(n - 3, 0.0), rhs(n - 2, 0.0);

    for (int it = 0; it < newton.max_iters; ++it) {
        burgers_rows(v_new, v, f, kappa, mu, residual);
        double r_inf = 0.0;
        for (int j = 1; j < n - 1; ++j) r_inf = std::max(r_inf, std::abs(residual[j]));
        if (r_inf <= newton.tol) return v_new;

        // Jacobian of the interior rows with respect to v_new[1..n-2].
        for (int j = 1; j < n - 1; ++j) {
            const int row = j - 1;
            diag[row] = 1.0 + 2.0 * mu;
            if (j + 1 < n - 1)
                upper[row] = kappa * (2.0 - 2.0 * v_new[j + 1] - 2.0 * v[j + 1]) * f[j + 1] - mu;
            if (j - 1 > 0)
                lower[row - 1] =
                    -kappa * (2.0 - 2.0 * v_new[j - 1] - 2.0 * v[j - 1]) * f[j - 1] - mu;
            rhs[row] = -residual[j];
        }
        const std::vector<double> delta = thomas_solve(lower, diag, upper, rhs);
        for (int j = 1; j < n - 1; ++j) v_new[j] += delta[j - 1];
        if (!std::isfinite(v_new[n / 2]))
            throw NumericError("burgers step: Newton iteration diverged");
    }
    throw NumericError("burgers step: Newton failed to reach tolerance");
}

Trajectory simulate_diffusion(std::span<const double> c, const SpaceTimeFn& source,
                              const BoundaryFn& bc_left, const BoundaryFn& bc_right,
                              std::vector<double> u0, const Grid1D& grid, double t_start,
                              double dt, int steps) {
    grid.validate();
    if (steps < 0) throw ConfigError("simulate: steps must be non-negative");
    Trajectory traj;
    traj.reserve(steps + 1);
    traj.push_back(std::move(u0));
    std::vector<double> src0(grid.n), src1(grid.n);
    for (int k = 0; k < steps; ++k) {
        const double t0 = t_start + k * dt;
        const double t1 = t0 + dt;
        for (int i = 0; i < grid.n; ++i) {
            const double xi = grid.x(i);
            src0[i] = source ? source(xi, t0) : 0.0;
            src1[i] = source ? source(xi, t1) : 0.0;
        }
        traj.push_back(cn_diffusion_step(traj.back(), c, src0, src1,
                                         bc_left ? bc_left(t1) : 0.0,
                                         bc_right ? bc_right(t1) : 0.0, grid, dt));
    }
    return traj;
}

Trajectory simulate_wave(std::span<const double> c, std::vector<double> u0, const Grid1D& grid,
                         double dt, int steps) {
    grid.validate();
    if (steps < 0) throw ConfigError("simulate: steps must be non-negative");
    Trajectory traj;
    traj.reserve(steps + 1);
    traj.push_back(std::move(u0));
    if (steps >= 1) traj.push_back(wave_bootstrap(traj[0], c, grid, dt));
    for (int k = 2; k <= steps; ++k)
        traj.push_back(wave_step(traj[k - 2], traj[k - 1], c, grid, dt));
    return traj;
}

Trajectory simulate_burgers(std::span<const double> f, double diffusion,
                            const BoundaryFn& bc_left, const BoundaryFn& bc_right,
                            std::vector<double> u0, const Grid1D& grid, double t_start, double dt,
                            int steps, const NewtonOptions& newton) {
    grid.validate();
    if (steps < 0) throw ConfigError("simulate: steps must be non-negative");
    Trajectory traj;
    traj.reserve(steps + 1);
    traj.push_back(std::move(u0));
    for (int k = 0; k < steps; ++k) {
        const double t1 = t_start + (k + 1) * dt;
        traj.push_back(burgers_step(traj.back(), f, diffusion, bc_left ? bc_left(t1) : 0.0,
                                    bc_right ? bc_right(t1) : 0.0, grid, dt, newton));
    }
    return traj;
}

}  // namespace pdecalib
