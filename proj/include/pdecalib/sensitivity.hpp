#pragma once

#include <span>
#include <vector>

#include "pdecalib/field_net.hpp"
#include "pdecalib/forward.hpp"

namespace pdecalib {

// Scalar functional of the recovered field whose parameter sensitivity is
// explored: either the field value at a fixed point, or its maximum over the
// evaluation grid (discrete argmax, lowest index on ties).
struct QuantityFunctional {
    enum class Kind { value_at_point, max_over_domain };
    Kind kind = Kind::value_at_point;
    double x_star = 0.0;
};

struct QuantityGrad {
    double value = 0.0;
    double anchor_x = 0.0;          // where the functional reads the field
    std::vector<double> grad;       // d q / d theta, flat layout
};

QuantityGrad quantity_grad(const NetworkParams& params, const NetworkArchitecture& arch,
                           const QuantityFunctional& functional, const Grid1D& grid);

// Family of perturbed fields f(theta + alpha * grad q) for alpha on a
// symmetric grid of n_alpha points over [-delta, delta] (n_alpha odd so
// alpha = 0 is hit exactly; that curve equals the base field bit for bit).
// The envelope is the pointwise min/max over the sampled curves.
struct SensitivityRegion {
    std::vector<double> alphas;
    std::vector<double> xs;
    std::vector<std::vector<double>> curves;  // curves[j][i] = f_{alpha_j}(x_i)
    std::vector<double> env_min;
    std::vector<double> env_max;
};

SensitivityRegion region(const NetworkParams& params, const NetworkArchitecture& arch,
                         std::span<const double> quantity_gradient, const Grid1D& grid,
                         double delta, int n_alpha);

}  // namespace pdecalib
