#include "pdecalib/residual.hpp"

#include <cmath>

#include "pdecalib/errors.hpp"

namespace pdecalib {

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::diffusion: return "diffusion";
        case ProblemKind::wave: return "wave";
        case ProblemKind::burgers: return "burgers";
    }
    return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "diffusion") return ProblemKind::diffusion;
    if (name == "wave") return ProblemKind::wave;
    if (name == "burgers") return ProblemKind::burgers;
    throw ConfigError("unknown problem kind: " + name);
}

void SnapshotSet::validate(int snapshots_per_group) const {
    grid.validate();
    if (!(dt > 0.0)) throw ConfigError("snapshot set requires dt > 0");
    if (groups.empty()) throw ConfigError("snapshot set is empty: nothing to fit");
    for (const SnapshotGroup& g : groups) {
        if (static_cast<int>(g.snaps.size()) != snapshots_per_group)
            throw ConfigError("snapshot group must hold exactly " +
                              std::to_string(snapshots_per_group) + " states");
        for (const std::vector<double>& s : g.snaps)
            if (static_cast<int>(s.size()) != grid.n)
                throw ConfigError("snapshot length does not match grid.n");
    }
}

namespace {

int snapshots_per_group(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::diffusion: return 2;
        case ProblemKind::wave: return 3;
        case ProblemKind::burgers: return 2;
    }
    return 0;
}

}  // namespace

std::vector<std::vector<double>> scheme_residuals(const ResidualProblem& problem,
                                                  std::span<const double> field_values,
                                                  std::vector<double>* d_dfield) {
    const SnapshotSet& data = problem.data;
    data.validate(snapshots_per_group(problem.kind));
    const int n = data.grid.n;
    if (static_cast<int>(field_values.size()) != n)
        throw ConfigError("field sample length does not match grid.n");

    const double h = data.grid.h();
    const double h2 = h * h;
    const double dt = data.dt;
    if (d_dfield) d_dfield->assign(n, 0.0);

    std::vector<std::vector<double>> residuals;
    residuals.reserve(data.groups.size());

    for (const SnapshotGroup& group : data.groups) {
        std::vector<double> r(n, 0.0);
        if (problem.kind == ProblemKind::diffusion) {
            const std::vector<double>& u0 = group.snaps[0];
            const std::vector<double>& u1 = group.snaps[1];
            const double t0 = group.t;
            const double t1 = group.t + dt;
            for (int i = 1; i < n - 1; ++i) {
                const double sbar =
                    problem.source
                        ? 0.5 * (problem.source(data.grid.x(i), t0) +
                                 problem.source(data.grid.x(i), t1))
                        : 0.0;
                const double b = ((u1[i + 1] - 2.0 * u1[i] + u1[i - 1]) +
                                  (u0[i + 1] - 2.0 * u0[i] + u0[i - 1])) /
                                 (2.0 * h2);
                r[i] = (u1[i] - u0[i]) / dt - field_values[i] * b - sbar;
                if (d_dfield) (*d_dfield)[i] += -2.0 * r[i] * b;
            }
        } else if (problem.kind == ProblemKind::wave) {
            const std::vector<double>& u0 = group.snaps[0];
            const std::vector<double>& u1 = group.snaps[1];
            const std::vector<double>& u2 = group.snaps[2];
            for (int i = 1; i < n - 1; ++i) {
                const double b = (u1[i + 1] - 2.0 * u1[i] + u1[i - 1]) / h2;
                r[i] = (u2[i] - 2.0 * u1[i] + u0[i]) / (dt * dt) - field_values[i] * b;
                if (d_dfield) (*d_dfield)[i] += -2.0 * r[i] * b;
            }
        } else {
            const std::vector<double>& old_v = group.snaps[0];
            const std::vector<double>& new_v = group.snaps[1];
            const double kappa = dt / (8.0 * h);
            const double mu = problem.diffusion * dt / (2.0 * h2);
            for (int j = 1; j < n - 1; ++j) {
                const double fp = field_values[j + 1];
                const double fm = field_values[j - 1];
                const double lhs =
                    (kappa * (2.0 - new_v[j + 1] - 2.0 * old_v[j + 1]) * fp - mu) * new_v[j + 1] +
                    (1.0 + 2.0 * mu) * new_v[j] +
                    (-kappa * (2.0 - new_v[j - 1] - 2.0 * old_v[j - 1]) * fm - mu) * new_v[j - 1];
                const double rhs =
                    -kappa * (old_v[j + 1] * (2.0 - old_v[j + 1]) * fp -
                              old_v[j - 1] * (2.0 - old_v[j - 1]) * fm) +
                    old_v[j] + mu * (old_v[j + 1] - 2.0 * old_v[j] + old_v[j - 1]);
                r[j] = lhs - rhs;
                if (d_dfield) {
                    const double dp = kappa * (2.0 - new_v[j + 1] - 2.0 * old_v[j + 1]) * new_v[j + 1] +
                                      kappa * old_v[j + 1] * (2.0 - old_v[j + 1]);
                    const double dm = -kappa * (2.0 - new_v[j - 1] - 2.0 * old_v[j - 1]) * new_v[j - 1] -
                                      kappa * old_v[j - 1] * (2.0 - old_v[j - 1]);
                    (*d_dfield)[j + 1] += 2.0 * r[j] * dp;
                    (*d_dfield)[j - 1] += 2.0 * r[j] * dm;
                }
            }
        }
        residuals.push_back(std::move(r));
    }
    return residuals;
}

namespace {

std::vector<std::vector<double>> residuals_from_network(const ResidualProblem& problem,
                                                        const NetworkArchitecture& arch,
                                                        const NetworkParams& params) {
    NetworkEvaluator eval(arch, params);
    const int n = problem.data.grid.n;
    std::vector<double> values(n);
    for (int i = 0; i < n; ++i) values[i] = eval.value(problem.data.grid.x(i));
    return scheme_residuals(problem, values);
}

}  // namespace

std::vector<std::vector<double>> diffusion_residuals(const ResidualProblem& problem,
                                                     const NetworkArchitecture& arch,
                                                     const NetworkParams& params) {
    if (problem.kind != ProblemKind::diffusion)
        throw ConfigError("diffusion_residuals called with a non-diffusion problem");
    return residuals_from_network(problem, arch, params);
}

std::vector<std::vector<double>> wave_residuals(const ResidualProblem& problem,
                                                const NetworkArchitecture& arch,
                                                const NetworkParams& params) {
    if (problem.kind != ProblemKind::wave)
        throw ConfigError("wave_residuals called with a non-wave problem");
    return residuals_from_network(problem, arch, params);
}

std::vector<std::vector<double>> burgers_residuals(const ResidualProblem& problem,
                                                   const NetworkArchitecture& arch,
                                                   const NetworkParams& params) {
    if (problem.kind != ProblemKind::burgers)
        throw ConfigError("burgers_residuals called with a non-burgers problem");
    return residuals_from_network(problem, arch, params);
}

LossAndGrad loss_and_grad(const ResidualProblem& problem, const NetworkArchitecture& arch,
                          std::span<const double> theta) {
    const NetworkParams params = unflatten(arch, theta);
    NetworkEvaluator eval(arch, params);
    const int n = problem.data.grid.n;

    std::vector<double> values(n);
    for (int i = 0; i < n; ++i) values[i] = eval.value(problem.data.grid.x(i));

    std::vector<double> adjoint;
    const std::vector<std::vector<double>> residuals =
        scheme_residuals(problem, values, &adjoint);

    LossAndGrad out;
    for (const std::vector<double>& r : residuals)
        for (double v : r) out.loss += v * v;

    out.grad.assign(theta.size(), 0.0);
    std::vector<double> row(theta.size());
    for (int i = 0; i < n; ++i) {
        if (adjoint[i] == 0.0) continue;
        eval.value_and_param_grad(problem.data.grid.x(i), row);
        const double a = adjoint[i];
        for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += a * row[j];
    }

    if (problem.lambda != 0.0) {
        for (std::size_t j = 0; j < theta.size(); ++j) {
            out.loss += problem.lambda * theta[j] * theta[j];
            out.grad[j] += 2.0 * problem.lambda * theta[j];
        }
    }
    return out;
}

LeastSquaresProblem least_squares_problem(const ResidualProblem& problem) {
    const SnapshotSet& data = problem.data;
    data.validate(snapshots_per_group(problem.kind));
    const int n = data.grid.n;
    const double h = data.grid.h();
    const double h2 = h * h;

    LeastSquaresProblem out;
    out.constrained.assign(n, false);

    // A node is constrained when its field value has a non-zero coefficient
    // in at least one residual row; coefficients depend on the data only.
    if (problem.kind == ProblemKind::diffusion || problem.kind == ProblemKind::wave) {
        for (const SnapshotGroup& group : data.groups) {
            const std::vector<double>& u0 = group.snaps[0];
            const std::vector<double>& u1 = group.snaps[1];
            for (int i = 1; i < n - 1; ++i) {
                double b;
                if (problem.kind == ProblemKind::diffusion)
                    b = ((u1[i + 1] - 2.0 * u1[i] + u1[i - 1]) +
                         (u0[i + 1] - 2.0 * u0[i] + u0[i - 1])) /
                        (2.0 * h2);
                else
                    b = (u1[i + 1] - 2.0 * u1[i] + u1[i - 1]) / h2;
                if (b != 0.0) out.constrained[i] = true;
            }
        }
        for (int i = 1; i < n - 1; ++i)
            if (!out.constrained[i]) out.underdetermined = true;
    } else {
        const double kappa = data.dt / (8.0 * h);
        for (const SnapshotGroup& group : data.groups) {
            const std::vector<double>& old_v = group.snaps[0];
            const std::vector<double>& new_v = group.snaps[1];
            for (int j = 1; j < n - 1; ++j) {
                const double dp = kappa * (2.0 - new_v[j + 1] - 2.0 * old_v[j + 1]) * new_v[j + 1] +
                                  kappa * old_v[j + 1] * (2.0 - old_v[j + 1]);
                const double dm = -kappa * (2.0 - new_v[j - 1] - 2.0 * old_v[j - 1]) * new_v[j - 1] -
                                  kappa * old_v[j - 1] * (2.0 - old_v[j - 1]);
                if (dp != 0.0) out.constrained[j + 1] = true;
                if (dm != 0.0) out.constrained[j - 1] = true;
            }
        }
        for (int i = 0; i < n; ++i)
            if (!out.constrained[i]) out.underdetermined = true;
    }

    ResidualProblem captured = problem;
    out.objective = [captured](std::span<const double> fvals, std::span<double> grad) -> double {
        std::vector<double> adjoint;
        const std::vector<std::vector<double>> residuals =
            scheme_residuals(captured, fvals, &adjoint);
        double loss = 0.0;
        for (const std::vector<double>& r : residuals)
            for (double v : r) loss += v * v;
        for (std::size_t i = 0; i < adjoint.size(); ++i) grad[i] = adjoint[i];
        return loss;
    };
    return out;
}

}  // namespace pdecalib
