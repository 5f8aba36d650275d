// SPDX-License-Identifier: Apache-2.0

// AVX2 kernel variants. This translation unit is compiled with -mavx2; the
// dispatcher only routes here after a runtime CPU check. Elementwise kernels
// use one vmulpd + one vaddpd per element so they match the scalar reference
// bit-for-bit; reductions keep a fixed lane-combine order so each run is
// deterministic.

#include "mosaic/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace mosaic::kernels {

namespace {

void v_axpy(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void v_scale(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i)
        y[i] = a * x[i];
}

void v_add_scaled(double* out, const double* a, const double* b, double s,
                  std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(out + i, _mm256_add_pd(va, _mm256_mul_pd(vs, vb)));
    }
    for (; i < n; ++i)
        out[i] = a[i] + s * b[i];
}

void v_hadamard(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

double v_dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                 _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                                 _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                 _mm256_loadu_pd(b + i)));
    acc0 = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc0);
    double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
    for (; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

void v_gemv(double* y, const double* w, const double* x, const double* bias,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = v_dot(w + r * cols, x, cols);
        y[r] = bias ? bias[r] + acc : acc;
    }
}

} // namespace

const Ops* avx2_ops_table() {
    static const Ops ops = {
        "avx2", v_axpy, v_scale, v_add_scaled, v_hadamard, v_dot, v_gemv,
    };
    return &ops;
}

} // namespace mosaic::kernels

#else

namespace mosaic::kernels {
const Ops* avx2_ops_table() { return nullptr; }
} // namespace mosaic::kernels

#endif
