// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace mosaic::kernels {

enum class Backend { scalar, avx2 };

/// Dense double-precision kernels behind runtime dispatch.
///
/// Elementwise ops (axpy, scale, add_scaled, hadamard) perform exactly one
/// rounding per multiply and one per add, so scalar and SIMD backends are
/// bit-identical for them (the build disables FMA contraction). Reduction
/// ops (dot, gemv) use per-backend accumulation order and agree only to
/// rounding error; each backend is individually deterministic.
struct Ops {
    const char* name;
    // y[i] += a * x[i]
    void (*axpy)(double* y, const double* x, double a, std::size_t n);
    // y[i] = a * x[i]
    void (*scale)(double* y, const double* x, double a, std::size_t n);
    // out[i] = a[i] + s * b[i]
    void (*add_scaled)(double* out, const double* a, const double* b, double s,
                       std::size_t n);
    // out[i] = a[i] * b[i]
    void (*hadamard)(double* out, const double* a, const double* b, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y = W x + bias; W row-major (rows x cols); bias may be null
    void (*gemv)(double* y, const double* w, const double* x, const double* bias,
                 std::size_t rows, std::size_t cols);
};

/// Reference implementation; always available.
const Ops& scalar_ops();

/// Currently selected backend table. Default selection: best supported
/// backend for the host CPU, overridable with MOSAIC_KERNELS=scalar|avx2.
const Ops& active();
Backend active_backend();

bool supported(Backend b);
const char* backend_name(Backend b);

/// Force a backend (throws mosaic::Error if unsupported on this host).
void force(Backend b);
/// Return to the auto-detected default.
void reset();

} // namespace mosaic::kernels
