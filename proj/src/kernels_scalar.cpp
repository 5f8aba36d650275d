// SPDX-License-Identifier: Apache-2.0
#include "mosaic/kernels.hpp"

namespace mosaic::kernels {

namespace {

void s_axpy(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void s_scale(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] = a * x[i];
}

void s_add_scaled(double* out, const double* a, const double* b, double s,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] + s * b[i];
}

void s_hadamard(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] * b[i];
}

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void s_gemv(double* y, const double* w, const double* x, const double* bias,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? bias[r] : 0.0;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c)
            acc += row[c] * x[c];
        y[r] = acc;
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar", s_axpy, s_scale, s_add_scaled, s_hadamard, s_dot, s_gemv,
    };
    return ops;
}

} // namespace mosaic::kernels
