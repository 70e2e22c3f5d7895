#include "pdecalib/field_net.hpp"

#include <cmath>
#include <cstddef>

#include "pdecalib/errors.hpp"
#include "pdecalib/random.hpp"

namespace pdecalib {

namespace {

// Value and first/second derivatives of the output transform at z.
struct TransformDerivs {
    double value;
    double d1;
    double d2;
};

TransformDerivs transform_derivs(const OutputTransform& t, double z) {
    if (t.kind == OutputTransform::Kind::identity) return {z, 1.0, 0.0};
    const double th = std::tanh(z);
    const double half_span = 0.5 * (t.hi - t.lo);
    const double sech2 = 1.0 - th * th;
    return {t.lo + half_span * (th + 1.0), half_span * sech2, half_span * (-2.0 * th * sech2)};
}

}  // namespace

int NetworkArchitecture::layer_rows(int k) const {
    return k < static_cast<int>(hidden_widths.size()) ? hidden_widths[k] : 1;
}

int NetworkArchitecture::layer_cols(int k) const {
    return k == 0 ? input_dim : hidden_widths[k - 1];
}

int NetworkArchitecture::param_count() const {
    int count = 0;
    for (int k = 0; k < depth(); ++k) count += layer_rows(k) * (layer_cols(k) + 1);
    return count;
}

void NetworkArchitecture::validate() const {
    if (input_dim <= 0) throw ConfigError("network.input_dim must be positive");
    if (hidden_widths.empty()) throw ConfigError("network.hidden_widths must be non-empty");
    for (int w : hidden_widths)
        if (w <= 0) throw ConfigError("network.hidden_widths entries must be positive");
    if (output.kind == OutputTransform::Kind::bounded && !(output.lo < output.hi))
        throw ConfigError("network.output bounded requires lo < hi");
}

void NetworkParams::validate_against(const NetworkArchitecture& arch) const {
    arch.validate();
    const int depth = arch.depth();
    if (static_cast<int>(weights.size()) != depth || static_cast<int>(biases.size()) != depth)
        throw ConfigError("params layer count does not match architecture");
    for (int k = 0; k < depth; ++k) {
        if (weights[k].rows != arch.layer_rows(k) || weights[k].cols != arch.layer_cols(k))
            throw ConfigError("params weight shape mismatch at layer " + std::to_string(k));
        if (static_cast<int>(biases[k].size()) != arch.layer_rows(k))
            throw ConfigError("params bias size mismatch at layer " + std::to_string(k));
    }
}

std::vector<double> flatten(const NetworkParams& params) {
    std::vector<double> flat;
    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        const Matrix& w = params.weights[k];
        flat.insert(flat.end(), w.data.begin(), w.data.end());
        flat.insert(flat.end(), params.biases[k].begin(), params.biases[k].end());
    }
    return flat;
}

NetworkParams unflatten(const NetworkArchitecture& arch, std::span<const double> flat) {
    arch.validate();
    if (static_cast<int>(flat.size()) != arch.param_count())
        throw ConfigError("flat parameter vector has wrong length");
    NetworkParams params;
    std::size_t pos = 0;
    for (int k = 0; k < arch.depth(); ++k) {
        Matrix w(arch.layer_rows(k), arch.layer_cols(k));
        for (double& v : w.data) v = flat[pos++];
        std::vector<double> b(arch.layer_rows(k));
        for (double& v : b) v = flat[pos++];
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    return params;
}

NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(seed);
    NetworkParams params;
    for (int k = 0; k < arch.depth(); ++k) {
        const int rows = arch.layer_rows(k);
        const int cols = arch.layer_cols(k);
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Matrix w(rows, cols);
        for (double& v : w.data) v = rng.uniform(-limit, limit);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(rows, 0.0);
    }
    return params;
}

NetworkEvaluator::NetworkEvaluator(const NetworkArchitecture& arch, const NetworkParams& params)
    : arch_(&arch), params_(&params) {
    params.validate_against(arch);
    if (arch.input_dim != 1) throw ConfigError("NetworkEvaluator requires input_dim == 1");
    const int depth = arch.depth();
    act_.resize(depth);
    delta_.resize(depth);
    for (int k = 0; k < depth; ++k) {
        act_[k].resize(arch.layer_cols(k));
        delta_[k].resize(arch.layer_rows(k));
    }
}

void NetworkEvaluator::set_params(const NetworkParams& params) {
    params.validate_against(*arch_);
    params_ = &params;
}

void NetworkEvaluator::run_forward(double x) {
    act_[0][0] = x;
    const int depth = arch_->depth();
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params_->weights[k];
        const std::vector<double>& b = params_->biases[k];
        const std::vector<double>& in = act_[k];
        if (k + 1 < depth) {
            std::vector<double>& out = act_[k + 1];
            for (int r = 0; r < w.rows; ++r) {
                double z = b[r];
                for (int c = 0; c < w.cols; ++c) z += w(r, c) * in[c];
                out[r] = std::tanh(z);
            }
        } else {
            double z = b[0];
            for (int c = 0; c < w.cols; ++c) z += w(0, c) * in[c];
            z_out_ = z;
        }
    }
}

double NetworkEvaluator::value(double x) {
    run_forward(x);
    return transform_derivs(arch_->output, z_out_).value;
}

double NetworkEvaluator::value_and_param_grad(double x, std::span<double> grad) {
    run_forward(x);
    const int depth = arch_->depth();
    const TransformDerivs out = transform_derivs(arch_->output, z_out_);

    delta_[depth - 1][0] = out.d1;
    for (int k = depth - 1; k > 0; --k) {
        const Matrix& w = params_->weights[k];
        const std::vector<double>& a = act_[k];  // tanh outputs feeding layer k
        std::vector<double>& below = delta_[k - 1];
        for (int c = 0; c < w.cols; ++c) {
            double s = 0.0;
            for (int r = 0; r < w.rows; ++r) s += w(r, c) * delta_[k][r];
            below[c] = s * (1.0 - a[c] * a[c]);
        }
    }

    std::size_t pos = 0;
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params_->weights[k];
        const std::vector<double>& in = act_[k];
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta_[k][r];
            for (int c = 0; c < w.cols; ++c) grad[pos++] = d * in[c];
        }
        for (int r = 0; r < w.rows; ++r) grad[pos++] = delta_[k][r];
    }
    return out.value;
}

double forward(const NetworkParams& params, const NetworkArchitecture& arch,
               std::span<const double> x) {
    params.validate_against(arch);
    if (static_cast<int>(x.size()) != arch.input_dim)
        throw ConfigError("input size does not match network.input_dim");
    std::vector<double> a(x.begin(), x.end());
    const int depth = arch.depth();
    double z_out = 0.0;
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params.weights[k];
        const std::vector<double>& b = params.biases[k];
        std::vector<double> out(w.rows);
        for (int r = 0; r < w.rows; ++r) {
            double z = b[r];
            for (int c = 0; c < w.cols; ++c) z += w(r, c) * a[c];
            out[r] = (k + 1 < depth) ? std::tanh(z) : z;
        }
        if (k + 1 < depth)
            a = std::move(out);
        else
            z_out = out[0];
    }
    return transform_derivs(arch.output, z_out).value;
}

std::vector<double> grad_input(const NetworkParams& params, const NetworkArchitecture& arch,
                               std::span<const double> x) {
    params.validate_against(arch);
    if (static_cast<int>(x.size()) != arch.input_dim)
        throw ConfigError("input size does not match network.input_dim");
    const int d = arch.input_dim;
    const int depth = arch.depth();

    std::vector<double> a(x.begin(), x.end());
    // jac: d a / d x, one row per active neuron.
    Matrix jac(d, d);
    for (int i = 0; i < d; ++i) jac(i, i) = 1.0;

    double z_out = 0.0;
    std::vector<double> jz_out(d, 0.0);
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params.weights[k];
        const std::vector<double>& b = params.biases[k];
        std::vector<double> out(w.rows);
        Matrix jout(w.rows, d);
        for (int r = 0; r < w.rows; ++r) {
            double z = b[r];
            for (int c = 0; c < w.cols; ++c) z += w(r, c) * a[c];
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int c = 0; c < w.cols; ++c) s += w(r, c) * jac(c, j);
                jout(r, j) = s;
            }
            out[r] = z;
        }
        if (k + 1 < depth) {
            for (int r = 0; r < w.rows; ++r) {
                const double th = std::tanh(out[r]);
                const double sech2 = 1.0 - th * th;
                out[r] = th;
                for (int j = 0; j < d; ++j) jout(r, j) *= sech2;
            }
            a = std::move(out);
            jac = std::move(jout);
        } else {
            z_out = out[0];
            for (int j = 0; j < d; ++j) jz_out[j] = jout(0, j);
        }
    }
    const TransformDerivs t = transform_derivs(arch.output, z_out);
    for (double& g : jz_out) g *= t.d1;
    return jz_out;
}

Matrix second_deriv_input(const NetworkParams& params, const NetworkArchitecture& arch,
                          std::span<const double> x) {
    params.validate_against(arch);
    if (static_cast<int>(x.size()) != arch.input_dim)
        throw ConfigError("input size does not match network.input_dim");
    const int d = arch.input_dim;
    const int depth = arch.depth();

    // Forward propagation of value, Jacobian, and Hessian per neuron.
    // hess stores d*d entries per neuron, row-major.
    std::vector<double> a(x.begin(), x.end());
    Matrix jac(d, d);
    for (int i = 0; i < d; ++i) jac(i, i) = 1.0;
    Matrix hess(d, d * d);  // all zero at the input

    double z_out = 0.0;
    std::vector<double> jz(d, 0.0), hz(d * d, 0.0);
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params.weights[k];
        const std::vector<double>& b = params.biases[k];
        std::vector<double> zvals(w.rows);
        Matrix jout(w.rows, d);
        Matrix hout(w.rows, d * d);
        for (int r = 0; r < w.rows; ++r) {
            double z = b[r];
            for (int c = 0; c < w.cols; ++c) z += w(r, c) * a[c];
            zvals[r] = z;
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int c = 0; c < w.cols; ++c) s += w(r, c) * jac(c, j);
                jout(r, j) = s;
            }
            for (int e = 0; e < d * d; ++e) {
                double s = 0.0;
                for (int c = 0; c < w.cols; ++c) s += w(r, c) * hess(c, e);
                hout(r, e) = s;
            }
        }
        if (k + 1 < depth) {
            std::vector<double> aout(w.rows);
            for (int r = 0; r < w.rows; ++r) {
                const double th = std::tanh(zvals[r]);
                const double sech2 = 1.0 - th * th;
                const double curv = -2.0 * th * sech2;
                aout[r] = th;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        hout(r, i * d + j) =
                            sech2 * hout(r, i * d + j) + curv * jout(r, i) * jout(r, j);
                for (int j = 0; j < d; ++j) jout(r, j) *= sech2;
            }
            a = std::move(aout);
            jac = std::move(jout);
            hess = std::move(hout);
        } else {
            z_out = zvals[0];
            for (int j = 0; j < d; ++j) jz[j] = jout(0, j);
            for (int e = 0; e < d * d; ++e) hz[e] = hout(0, e);
        }
    }
    const TransformDerivs t = transform_derivs(arch.output, z_out);
    Matrix result(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            result(i, j) = t.d1 * hz[i * d + j] + t.d2 * jz[i] * jz[j];
    return result;
}

std::vector<double> grad_params(const NetworkParams& params, const NetworkArchitecture& arch,
                                std::span<const double> x) {
    params.validate_against(arch);
    if (arch.input_dim == 1) {
        NetworkEvaluator eval(arch, params);
        std::vector<double> grad(arch.param_count());
        eval.value_and_param_grad(x[0], grad);
        return grad;
    }
    // General-input backprop mirrors the evaluator with a vector input.
    const int depth = arch.depth();
    std::vector<std::vector<double>> act(depth);
    act[0].assign(x.begin(), x.end());
    double z_out = 0.0;
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params.weights[k];
        const std::vector<double>& b = params.biases[k];
        std::vector<double> out(w.rows);
        for (int r = 0; r < w.rows; ++r) {
            double z = b[r];
            for (int c = 0; c < w.cols; ++c) z += w(r, c) * act[k][c];
            out[r] = (k + 1 < depth) ? std::tanh(z) : z;
        }
        if (k + 1 < depth)
            act[k + 1] = std::move(out);
        else
            z_out = out[0];
    }
    const TransformDerivs t = transform_derivs(arch.output, z_out);
    std::vector<std::vector<double>> delta(depth);
    delta[depth - 1] = {t.d1};
    for (int k = depth - 1; k > 0; --k) {
        const Matrix& w = params.weights[k];
        delta[k - 1].assign(w.cols, 0.0);
        for (int c = 0; c < w.cols; ++c) {
            double s = 0.0;
            for (int r = 0; r < w.rows; ++r) s += w(r, c) * delta[k][r];
            delta[k - 1][c] = s * (1.0 - act[k][c] * act[k][c]);
        }
    }
    std::vector<double> grad(arch.param_count());
    std::size_t pos = 0;
    for (int k = 0; k < depth; ++k) {
        const Matrix& w = params.weights[k];
        for (int r = 0; r < w.rows; ++r)
            for (int c = 0; c < w.cols; ++c) grad[pos++] = delta[k][r] * act[k][c];
        for (int r = 0; r < w.rows; ++r) grad[pos++] = delta[k][r];
    }
    return grad;
}

NetworkParams project(const NetworkParams& params, const ProjectionConstraint& constraint) {
    if (!constraint.enabled) return params;
    if (!(constraint.bound > 0.0)) throw ConfigError("projection bound must be positive");
    // Relative slack keeps the map idempotent: a freshly scaled matrix whose
    // recomputed norm lands within rounding of the bound is left alone.
    const double slack = 1.0 + 1e-12;
    NetworkParams out = params;
    for (Matrix& w : out.weights) {
        const double norm = spectral_norm(w);
        if (norm > constraint.bound * slack) {
            const double scale = constraint.bound / norm;
            for (double& v : w.data) v *= scale;
        }
    }
    std::vector<double>& last_bias = out.biases.back();
    const double bias_norm = norm2(last_bias);
    if (bias_norm > constraint.bound * slack) {
        const double scale = constraint.bound / bias_norm;
        for (double& v : last_bias) v *= scale;
    }
    return out;
}

DerivativeBounds derivative_bounds(const NetworkArchitecture& arch,
                                   const ProjectionConstraint& constraint) {
    arch.validate();
    if (!(constraint.bound > 0.0)) throw ConfigError("projection bound must be positive");
    const double c = constraint.bound;
    const int n_l = arch.depth();
    DerivativeBounds bounds;
    bounds.first_order = std::pow(c, n_l);
    if (std::abs(c - 1.0) < 1e-12)
        bounds.second_order = 2.0 * (n_l - 1) * std::pow(c, n_l + 1);
    else
        bounds.second_order = 2.0 * std::pow(c, n_l + 1) * (std::pow(c, n_l - 1) - 1.0) / (c - 1.0);
    return bounds;
}

}  // namespace pdecalib
