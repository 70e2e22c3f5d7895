#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdecalib/field_net.hpp"
#include "pdecalib/forward.hpp"

namespace pdecalib {

enum class ProblemKind { diffusion, wave, burgers };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

// m consecutive observed states starting at time t, spaced by the set's dt.
struct SnapshotGroup {
    double t = 0.0;
    std::vector<std::vector<double>> snaps;
};

struct NoiseMeta {
    double stddev = 0.0;
    std::uint64_t seed = 0;
};

struct SnapshotSet {
    Grid1D grid;
    double dt = 0.0;  // spacing between consecutive snapshots in a group
    std::vector<SnapshotGroup> groups;
    NoiseMeta noise;

    void validate(int snapshots_per_group) const;
};

// Everything a residual evaluation needs besides the field values.
struct ResidualProblem {
    ProblemKind kind = ProblemKind::diffusion;
    SnapshotSet data;
    SpaceTimeFn source;       // diffusion only; may be empty for zero source
    double diffusion = 0.0;   // burgers viscosity
    double lambda = 0.0;      // L2 penalty weight on network parameters
};

// Interior scheme residuals per group, given the field sampled at the grid
// nodes. residuals[g] has grid.n entries with zero at both boundary slots.
//
//   diffusion: r_i = (U1_i - U0_i)/dt - w_i (D2 U1 + D2 U0)_i / 2 - sbar_i
//   wave:      r_i = (U2 - 2 U1 + U0)_i / dt^2 - w_i (D2 U1)_i
//   burgers:   implicit conservative rows with U1 as the new level; r_j sees
//              the field at nodes j-1 and j+1 only.
//
// When d_dfield is non-null it accumulates d(sum_g r^2)/d(w_i) per node.
std::vector<std::vector<double>> scheme_residuals(const ResidualProblem& problem,
                                                  std::span<const double> field_values,
                                                  std::vector<double>* d_dfield = nullptr);

// Residuals with the field given by a network; thin wrappers that sample the
// network at the grid nodes first.
std::vector<std::vector<double>> diffusion_residuals(const ResidualProblem& problem,
                                                     const NetworkArchitecture& arch,
                                                     const NetworkParams& params);
std::vector<std::vector<double>> wave_residuals(const ResidualProblem& problem,
                                                const NetworkArchitecture& arch,
                                                const NetworkParams& params);
std::vector<std::vector<double>> burgers_residuals(const ResidualProblem& problem,
                                                   const NetworkArchitecture& arch,
                                                   const NetworkParams& params);

// loss(theta) = sum_g sum_i r_i^2 + lambda |theta|^2 with analytic gradient:
// the per-node adjoint from scheme_residuals is backpropagated through one
// network evaluation per grid node.
struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

LossAndGrad loss_and_grad(const ResidualProblem& problem, const NetworkArchitecture& arch,
                          std::span<const double> theta);

// The same residual loss with the nodal field values themselves as the
// unknowns (no network). Objective over a vector of length grid.n; value and
// gradient are analytic. `constrained` marks nodes whose value actually
// enters some residual; unconstrained nodes make the problem underdetermined.
struct LeastSquaresProblem {
    std::function<double(std::span<const double>, std::span<double>)> objective;
    std::vector<bool> constrained;
    bool underdetermined = false;
};

LeastSquaresProblem least_squares_problem(const ResidualProblem& problem);

}  // namespace pdecalib
