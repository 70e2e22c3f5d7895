#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdecalib {

// Dense row-major matrix. Sized for the small layers used here (tens of
// rows/columns); no expression templates, no views.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);

// Largest singular value. Exact to roundoff: computed from the symmetric
// eigenproblem of W^T W (cyclic Jacobi), with a direct path for single
// row/column matrices.
double spectral_norm(const Matrix& w);

}  // namespace pdecalib
