#include "pdecalib/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pdecalib {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

// Cyclic Jacobi diagonalization of a symmetric matrix; returns the largest
// eigenvalue. Deterministic sweep order, converges to roundoff.
double largest_eigenvalue_symmetric(Matrix b) {
    const int n = b.rows;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += b(p, q) * b(p, q);
        if (off <= 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = b(p, q);
                if (apq == 0.0) continue;
                const double app = b(p, p);
                const double aqq = b(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double bkp = b(k, p);
                    const double bkq = b(k, q);
                    b(k, p) = c * bkp - s * bkq;
                    b(k, q) = s * bkp + c * bkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double bpk = b(p, k);
                    const double bqk = b(q, k);
                    b(p, k) = c * bpk - s * bqk;
                    b(q, k) = s * bpk + c * bqk;
                }
            }
        }
    }
    double lam = b(0, 0);
    for (int i = 1; i < n; ++i) lam = std::max(lam, b(i, i));
    return lam;
}

}  // namespace

double spectral_norm(const Matrix& w) {
    if (w.rows == 0 || w.cols == 0) return 0.0;
    if (w.rows == 1 || w.cols == 1) return norm2(w.data);
    const int n = w.cols;
    Matrix b(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < w.rows; ++k) s += w(k, i) * w(k, j);
            b(i, j) = s;
            b(j, i) = s;
        }
    }
    const double lam = largest_eigenvalue_symmetric(std::move(b));
    return std::sqrt(std::max(0.0, lam));
}

}  // namespace pdecalib
