#include "pdecalib/sensitivity.hpp"

#include <limits>

#include "pdecalib/errors.hpp"

namespace pdecalib {

QuantityGrad quantity_grad(const NetworkParams& params, const NetworkArchitecture& arch,
                           const QuantityFunctional& functional, const Grid1D& grid) {
    grid.validate();
    QuantityGrad out;
    if (functional.kind == QuantityFunctional::Kind::value_at_point) {
        out.anchor_x = functional.x_star;
    } else {
        NetworkEvaluator eval(arch, params);
        double best = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < grid.n; ++i) {
            const double v = eval.value(grid.x(i));
            if (v > best) {  // strict: ties keep the lowest index
                best = v;
                best_i = i;
            }
        }
        out.anchor_x = grid.x(best_i);
    }
    const double x[1] = {out.anchor_x};
    out.value = forward(params, arch, x);
    out.grad = grad_params(params, arch, x);
    return out;
}

SensitivityRegion region(const NetworkParams& params, const NetworkArchitecture& arch,
                         std::span<const double> quantity_gradient, const Grid1D& grid,
                         double delta, int n_alpha) {
    grid.validate();
    params.validate_against(arch);
    if (!(delta >= 0.0)) throw ConfigError("sensitivity delta must be non-negative");
    if (n_alpha < 1 || n_alpha % 2 == 0)
        throw ConfigError("sensitivity n_alpha must be odd and positive");
    if (static_cast<int>(quantity_gradient.size()) != arch.param_count())
        throw ConfigError("quantity gradient length does not match the parameter count");

    SensitivityRegion out;
    out.alphas.resize(n_alpha);
    // alpha_j = delta * (j - half) / half; the midpoint is exactly 0 and
    // halving/doubling (delta, n_alpha) reproduces shared alphas bit for bit.
    const double half = (n_alpha - 1) / 2;
    for (int j = 0; j < n_alpha; ++j)
        out.alphas[j] = (n_alpha == 1) ? 0.0 : delta * ((j - half) / half);

    out.xs.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) out.xs[i] = grid.x(i);

    const std::vector<double> theta = flatten(params);
    std::vector<double> shifted(theta.size());
    out.curves.resize(n_alpha);
    out.env_min.assign(grid.n, std::numeric_limits<double>::infinity());
    out.env_max.assign(grid.n, -std::numeric_limits<double>::infinity());

    for (int j = 0; j < n_alpha; ++j) {
        const double alpha = out.alphas[j];
        for (std::size_t k = 0; k < theta.size(); ++k)
            shifted[k] = (alpha == 0.0) ? theta[k] : theta[k] + alpha * quantity_gradient[k];
        const NetworkParams p = unflatten(arch, shifted);
        NetworkEvaluator eval(arch, p);
        std::vector<double>& curve = out.curves[j];
        curve.resize(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            curve[i] = eval.value(out.xs[i]);
            out.env_min[i] = std::min(out.env_min[i], curve[i]);
            out.env_max[i] = std::max(out.env_max[i], curve[i]);
        }
    }
    return out;
}

}  // namespace pdecalib
