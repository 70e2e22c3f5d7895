#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdecalib/linalg.hpp"

namespace pdecalib {

// Output map applied to the final affine pre-activation z.
//   identity:  f = z
//   bounded:   f = lo + (hi - lo) * (tanh(z) + 1) / 2, so f stays in (lo, hi)
struct OutputTransform {
    enum class Kind { identity, bounded };
    Kind kind = Kind::identity;
    double lo = 0.0;
    double hi = 0.0;

    static OutputTransform identity() { return {}; }
    static OutputTransform bounded(double lo, double hi) {
        return {Kind::bounded, lo, hi};
    }
};

// Fully connected network with tanh hidden layers and an affine output row.
// depth() counts weight matrices: hidden_widths.size() tanh layers plus the
// output layer. A scalar field on R^input_dim is the only use here.
struct NetworkArchitecture {
    int input_dim = 1;
    std::vector<int> hidden_widths = {20, 20};
    OutputTransform output = OutputTransform::identity();

    int depth() const { return static_cast<int>(hidden_widths.size()) + 1; }

    // Rows/cols of weight matrix k, k in [0, depth()).
    int layer_rows(int k) const;
    int layer_cols(int k) const;

    int param_count() const;

    // Throws ConfigError on non-positive widths/input_dim, empty hidden
    // stack, or bounded output with lo >= hi.
    void validate() const;
};

// Weights and biases, one entry per layer. Flat layout interleaves
// row-major W_k followed by b_k, for k = 0 .. depth-1.
struct NetworkParams {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    void validate_against(const NetworkArchitecture& arch) const;
};

std::vector<double> flatten(const NetworkParams& params);
NetworkParams unflatten(const NetworkArchitecture& arch, std::span<const double> flat);

// Glorot-style init: W_k entries uniform on +-sqrt(6 / (fan_in + fan_out)),
// biases zero. Same seed gives bit-identical parameters.
NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed);

// Network value at x (x.size() == input_dim).
double forward(const NetworkParams& params, const NetworkArchitecture& arch,
               std::span<const double> x);

// d f / d x, length input_dim.
std::vector<double> grad_input(const NetworkParams& params, const NetworkArchitecture& arch,
                               std::span<const double> x);

// d^2 f / d x^2, input_dim x input_dim, computed analytically.
Matrix second_deriv_input(const NetworkParams& params, const NetworkArchitecture& arch,
                          std::span<const double> x);

// d f / d theta in flat layout.
std::vector<double> grad_params(const NetworkParams& params, const NetworkArchitecture& arch,
                                std::span<const double> x);

// Spectral-norm cap applied to every weight matrix and to the output bias:
// W -> W / max{1, |W|_2 / bound}. Parameters already inside the ball are
// returned unchanged; a 1e-12 relative slack makes the map idempotent under
// floating-point rounding.
struct ProjectionConstraint {
    double bound = 1.0;
    bool enabled = true;
};

NetworkParams project(const NetworkParams& params, const ProjectionConstraint& constraint);

// Uniform derivative bounds implied by the cap C with depth n_l:
//   first_order  = C^n_l
//   second_order = 2 C^(n_l+1) (C^(n_l-1) - 1) / (C - 1),
// with the C -> 1 limit 2 (n_l - 1) C^(n_l+1). Valid for identity output.
struct DerivativeBounds {
    double first_order = 0.0;
    double second_order = 0.0;
};

DerivativeBounds derivative_bounds(const NetworkArchitecture& arch,
                                   const ProjectionConstraint& constraint);

// Reusable evaluator for hot loops: value plus parameter gradient at a point
// without per-call allocation. Results match forward()/grad_params() exactly.
class NetworkEvaluator {
public:
    NetworkEvaluator(const NetworkArchitecture& arch, const NetworkParams& params);

    void set_params(const NetworkParams& params);

    double value(double x);
    // Fills grad (size param_count) with d f / d theta and returns f(x).
    double value_and_param_grad(double x, std::span<double> grad);

private:
    const NetworkArchitecture* arch_;
    const NetworkParams* params_;
    std::vector<std::vector<double>> act_;    // act_[k]: output of layer k-1 (act_[0] = x)
    std::vector<std::vector<double>> delta_;  // backprop buffers per layer
    double z_out_ = 0.0;
    void run_forward(double x);
};

}  // namespace pdecalib
