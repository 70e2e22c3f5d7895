#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pdecalib {

// Uniform grid of n points, endpoints included: x_i = x_min + i*h with
// h = (x_max - x_min) / (n - 1). Interior means indices 1 .. n-2.
struct Grid1D {
    int n = 0;
    double x_min = -1.0;
    double x_max = 1.0;

    double h() const { return (x_max - x_min) / (n - 1); }
    double x(int i) const { return x_min + i * h(); }

    void validate() const;  // throws ConfigError when n < 3 or x_min >= x_max
};

// Tridiagonal solve (Thomas algorithm). lower/upper have length n-1, diag and
// rhs length n. Throws NumericError when an eliminated pivot falls below
// 1e-14 in magnitude.
std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs);

// One Crank-Nicolson step of u_t = c(x) u_xx + s(x,t):
//   (v'_i - v_i)/dt = c_i/2 (D2 v)_i + c_i/2 (D2 v')_i + (s_i + s'_i)/2
// on the interior, with D2 the centred second difference; the returned state
// carries the supplied Dirichlet values at both ends. src0/src1 sample the
// source at the old and new time level.
std::vector<double> cn_diffusion_step(std::span<const double> v, std::span<const double> c,
                                      std::span<const double> src0, std::span<const double> src1,
                                      double bc_left, double bc_right, const Grid1D& grid,
                                      double dt);

// Leapfrog step of u_tt = c(x) u_xx:
//   v''_i = 2 v'_i - v_i + dt^2 c_i (D2 v')_i
// with homogeneous Dirichlet ends. Requires max(c) * dt / h <= 1, else
// NumericError (CFL).
std::vector<double> wave_step(std::span<const double> v_old, std::span<const double> v_cur,
                              std::span<const double> c, const Grid1D& grid, double dt);

// First wave level from u(x,0) = u0, u_t(x,0) = 0:
//   v1_i = v0_i + dt^2/2 c_i (D2 v0)_i   (interior), boundary zero.
std::vector<double> wave_bootstrap(std::span<const double> v0, std::span<const double> c,
                                   const Grid1D& grid, double dt);

struct NewtonOptions {
    double tol = 1e-10;   // inf-norm of the scheme residual
    int max_iters = 50;
};

// One implicit step of u_t + d/dx(u(1-u) f(x)) - diffusion u_xx = 0. Interior
// row j couples v'_{j-1..j+1} through
//   [k (2 - v'_{j+1} - 2 v_{j+1}) f_{j+1} - m] v'_{j+1} + (1 + 2m) v'_j
//   + [-k (2 - v'_{j-1} - 2 v_{j-1}) f_{j-1} - m] v'_{j-1}
//   = -k [v_{j+1}(2 - v_{j+1}) f_{j+1} - v_{j-1}(2 - v_{j-1}) f_{j-1}]
//     + v_j + m (v_{j+1} - 2 v_j + v_{j-1}),
// k = dt/(8h), m = diffusion*dt/(2h^2). Solved by Newton with a tridiagonal
// Jacobian; boundary entries are held at bc_left/bc_right. Throws
// NumericError when Newton fails to reach tol.
std::vector<double> burgers_step(std::span<const double> v, std::span<const double> f,
                                 double diffusion, double bc_left, double bc_right,
                                 const Grid1D& grid, double dt,
                                 const NewtonOptions& newton = {});

using Trajectory = std::vector<std::vector<double>>;  // states v^0 .. v^steps
using SpaceTimeFn = std::function<double(double, double)>;  // (x, t)
using BoundaryFn = std::function<double(double)>;           // (t)

// Time loops over the single-step kernels. Each returns steps+1 states
// starting from the initial data at t_start.
Trajectory simulate_diffusion(std::span<const double> c, const SpaceTimeFn& source,
                              const BoundaryFn& bc_left, const BoundaryFn& bc_right,
                              std::vector<double> u0, const Grid1D& grid, double t_start,
                              double dt, int steps);

Trajectory simulate_wave(std::span<const double> c, std::vector<double> u0, const Grid1D& grid,
                         double dt, int steps);

Trajectory simulate_burgers(std::span<const double> f, double diffusion,
                            const BoundaryFn& bc_left, const BoundaryFn& bc_right,
                            std::vector<double> u0, const Grid1D& grid, double t_start, double dt,
                            int steps, const NewtonOptions& newton = {});

}  // namespace pdecalib
