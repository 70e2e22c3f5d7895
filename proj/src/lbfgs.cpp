#include "pdecalib/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pdecalib/errors.hpp"
#include "pdecalib/linalg.hpp"
#include "pdecalib/random.hpp"

namespace pdecalib {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::relative_decrease: return "relative_decrease";
        case StopReason::gradient_norm: return "gradient_norm";
        case StopReason::max_iters: return "max_iters";
        case StopReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

namespace {

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// Minimizer of the cubic interpolant through (a, fa, da) and (b, fb, db).
// Exact when the underlying function is a quadratic or cubic.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (!(disc >= 0.0)) return 0.5 * (a + b);
    const double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    const double alpha = b - (b - a) * (db + d2 - d1) / denom;
    return alpha;
}

struct LineSearchResult {
    bool ok = false;
    double alpha = 0.0;
    double f = 0.0;
};

// Strong Wolfe line search (bracket then zoom). evaluate(alpha) must fill the
// caller's trial-gradient buffer and return the objective value; dphi is read
// back through the supplied functor.
template <typename Eval>
LineSearchResult wolfe_line_search(const Eval& evaluate, double f0, double dphi0,
                                   double alpha_init, const WolfeParams& wolfe) {
    int evals = 0;
    const double c1 = wolfe.c1;
    const double c2 = wolfe.c2;

    struct Point {
        double alpha, f, dphi;
        bool finite;
    };

    auto probe = [&](double alpha) -> Point {
        double dphi = 0.0;
        const double f = evaluate(alpha, dphi);
        ++evals;
        return {alpha, f, dphi, std::isfinite(f) && std::isfinite(dphi)};
    };

    auto zoom = [&](Point lo, Point hi) -> LineSearchResult {
        while (evals < wolfe.max_trials) {
            const double width = hi.alpha - lo.alpha;
            if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
            double alpha;
            if (lo.finite && hi.finite) {
                alpha = cubic_minimizer(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
                const double margin = 1e-3 * std::abs(width);
                const double a = std::min(lo.alpha, hi.alpha) + margin;
                const double b = std::max(lo.alpha, hi.alpha) - margin;
                if (!std::isfinite(alpha) || alpha < a || alpha > b)
                    alpha = lo.alpha + 0.5 * width;
            } else {
                alpha = lo.alpha + 0.5 * width;
            }
            const Point mid = probe(alpha);
            if (!mid.finite || mid.f > f0 + c1 * alpha * dphi0 || mid.f >= lo.f) {
                hi = mid;
            } else {
                if (std::abs(mid.dphi) <= -c2 * dphi0) return {true, mid.alpha, mid.f};
                if (mid.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = mid;
            }
        }
        return {};
    };

    Point prev{0.0, f0, dphi0, true};
    double alpha = alpha_init;
    bool first = true;
    while (evals < wolfe.max_trials) {
        const Point cur = probe(alpha);
        if (!cur.finite || cur.f > f0 + c1 * alpha * dphi0 || (!first && cur.f >= prev.f))
            return zoom(prev, cur);
        if (std::abs(cur.dphi) <= -c2 * dphi0) return {true, cur.alpha, cur.f};
        if (cur.dphi >= 0.0) return zoom(cur, prev);
        prev = cur;
        alpha = std::min(2.0 * alpha, 1e20);
        first = false;
    }
    return {};
}

}  // namespace

OptimizationTrace minimize(const Objective& objective, std::vector<double> x0,
                           const OptimizerConfig& config, const Projector& projector) {
    if (x0.empty()) throw ConfigError("optimizer requires a non-empty start point");
    if (config.memory <= 0) throw ConfigError("optimizer.memory must be positive");
    if (!(config.wolfe.c1 > 0.0 && config.wolfe.c1 < config.wolfe.c2 && config.wolfe.c2 < 1.0))
        throw ConfigError("line search requires 0 < c1 < c2 < 1");

    const std::size_t n = x0.size();
    std::vector<double> x = std::move(x0);
    if (projector) projector(x);

    std::vector<double> g(n), g_new(n), x_trial(n), g_trial(n), direction(n), q(n);
    double f = objective(x, g);
    if (!std::isfinite(f)) throw NumericError("objective is non-finite at the start point");

    OptimizationTrace trace;
    trace.losses.push_back(f);
    trace.grad_norms.push_back(norm_inf(g));
    trace.stop_reason = StopReason::max_iters;

    std::deque<CurvaturePair> pairs;

    auto compute_direction = [&]() {
        q = g;
        std::vector<double> alpha_coef(pairs.size());
        for (std::size_t i = pairs.size(); i-- > 0;) {
            const CurvaturePair& p = pairs[i];
            const double a = p.rho * dot(p.s, q);
            alpha_coef[i] = a;
            for (std::size_t j = 0; j < n; ++j) q[j] -= a * p.y[j];
        }
        double gamma = 1.0;
        if (!pairs.empty()) {
            const CurvaturePair& last = pairs.back();
            const double yy = dot(last.y, last.y);
            if (yy > 0.0) gamma = dot(last.s, last.y) / yy;
        }
        for (std::size_t j = 0; j < n; ++j) q[j] *= gamma;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const CurvaturePair& p = pairs[i];
            const double beta = p.rho * dot(p.y, q);
            const double coef = alpha_coef[i] - beta;
            for (std::size_t j = 0; j < n; ++j) q[j] += coef * p.s[j];
        }
        for (std::size_t j = 0; j < n; ++j) direction[j] = -q[j];
    };

    if (norm_inf(g) <= config.eps2) {
        trace.stop_reason = StopReason::gradient_norm;
        trace.final_x = x;
        trace.final_loss = f;
        return trace;
    }

    for (int iter = 0; iter < config.max_iters; ++iter) {
        compute_direction();
        double dphi0 = dot(direction, g);
        if (!(dphi0 < 0.0)) {
            pairs.clear();
            for (std::size_t j = 0; j < n; ++j) direction[j] = -g[j];
            dphi0 = -dot(g, g);
        }

        const double dir_norm = norm2(direction);
        double alpha_init = 1.0;
        if (pairs.empty()) alpha_init = std::min(1.0, 1.0 / std::max(dir_norm, 1e-12));

        auto evaluate = [&](double alpha, double& dphi) -> double {
            for (std::size_t j = 0; j < n; ++j) x_trial[j] = x[j] + alpha * direction[j];
            const double ft = objective(x_trial, g_trial);
            dphi = dot(g_trial, direction);
            return ft;
        };

        LineSearchResult ls = wolfe_line_search(evaluate, f, dphi0, alpha_init, config.wolfe);
        if (!ls.ok) {
            trace.stop_reason = StopReason::line_search_failure;
            break;
        }

        // Trial buffers hold the accepted point; project and, if the point
        // moved, re-evaluate. Backtrack so accepted losses never increase.
        double f_new = ls.f;
        std::vector<double>* x_accept = &x_trial;
        std::vector<double>* g_accept = &g_trial;
        std::vector<double> x_proj, g_proj;
        if (projector) {
            double alpha = ls.alpha;
            bool ok = false;
            for (int back = 0; back < 40; ++back) {
                x_proj.assign(n, 0.0);
                for (std::size_t j = 0; j < n; ++j) x_proj[j] = x[j] + alpha * direction[j];
                projector(x_proj);
                bool moved = false;
                for (std::size_t j = 0; j < n; ++j) {
                    if (x_proj[j] != x[j] + alpha * direction[j]) {
                        moved = true;
                        break;
                    }
                }
                if (!moved) {
                    for (std::size_t j = 0; j < n; ++j) x_trial[j] = x[j] + alpha * direction[j];
                    f_new = objective(x_trial, g_trial);
                    x_accept = &x_trial;
                    g_accept = &g_trial;
                    ok = std::isfinite(f_new) && f_new <= f;
                    if (ok) break;
                } else {
                    g_proj.assign(n, 0.0);
                    f_new = objective(x_proj, g_proj);
                    x_accept = &x_proj;
                    g_accept = &g_proj;
                    ok = std::isfinite(f_new) && f_new <= f;
                    if (ok) break;
                }
                alpha *= 0.5;
            }
            if (!ok) {
                trace.stop_reason = StopReason::line_search_failure;
                break;
            }
        }

        std::vector<double> s(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = (*x_accept)[j] - x[j];
            y[j] = (*g_accept)[j] - g[j];
        }
        const double sy = dot(s, y);
        if (sy > 1e-10) {
            pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(pairs.size()) > config.memory) pairs.pop_front();
        }

        const double f_old = f;
        x = *x_accept;
        g = *g_accept;
        f = f_new;
        trace.iterations = iter + 1;
        trace.losses.push_back(f);
        trace.grad_norms.push_back(norm_inf(g));

        if (std::abs(f - f_old) <= config.eps1 * std::max(std::abs(f_old), 1e-300)) {
            trace.stop_reason = StopReason::relative_decrease;
            break;
        }
        if (norm_inf(g) <= config.eps2) {
            trace.stop_reason = StopReason::gradient_norm;
            break;
        }
    }

    trace.final_x = std::move(x);
    trace.final_loss = f;
    return trace;
}

double gradient_check(const Objective& objective, std::span<const double> x, double step,
                      int max_coords, std::uint64_t seed) {
    const std::size_t n = x.size();
    std::vector<double> g(n), scratch(n);
    std::vector<double> xt(x.begin(), x.end());
    objective(xt, g);

    std::vector<std::size_t> coords;
    if (max_coords <= 0 || n <= static_cast<std::size_t>(max_coords)) {
        coords.resize(n);
        for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
        Rng rng(seed);
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        for (int k = 0; k < max_coords; ++k) {
            const std::size_t pick = k + rng.next_u64() % (n - k);
            std::swap(all[k], all[pick]);
            coords.push_back(all[k]);
        }
    }

    double worst = 0.0;
    for (std::size_t i : coords) {
        const double h = step * std::max(1.0, std::abs(xt[i]));
        const double saved = xt[i];
        xt[i] = saved + h;
        const double fp = objective(xt, scratch);
        xt[i] = saved - h;
        const double fm = objective(xt, scratch);
        xt[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double err = std::abs(g[i] - fd) / std::max({1.0, std::abs(fd), std::abs(g[i])});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace pdecalib
