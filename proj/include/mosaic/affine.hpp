// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "mosaic/kernels.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

/// Dense affine map y = W x + b, W row-major (rows x cols).
struct AffineParams {
    int rows = 0;
    int cols = 0;
    std::vector<double> w; // rows * cols
    std::vector<double> b; // rows

    void apply(const double* x, double* y) const {
        kernels::active().gemv(y, w.data(), x, b.data(),
                               static_cast<std::size_t>(rows),
                               static_cast<std::size_t>(cols));
    }
};

/// Gaussian init scaled by 1/sqrt(cols) so tanh stays in its active range.
inline AffineParams random_affine(Rng& rng, int rows, int cols, double gain = 1.0,
                                  double bias_scale = 0.1) {
    AffineParams p;
    p.rows = rows;
    p.cols = cols;
    p.w.resize(static_cast<std::size_t>(rows) * cols);
    p.b.resize(rows);
    const double scale = gain / std::sqrt(static_cast<double>(cols));
    for (auto& v : p.w)
        v = scale * rng.normal();
    for (auto& v : p.b)
        v = bias_scale * rng.normal();
    return p;
}

/// Identity plus small Gaussian noise; square maps only.
inline AffineParams near_identity_affine(Rng& rng, int n, double noise) {
    AffineParams p;
    p.rows = n;
    p.cols = n;
    p.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    p.b.assign(n, 0.0);
    const double scale = noise / std::sqrt(static_cast<double>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            p.w[static_cast<std::size_t>(r) * n + c] = (r == c ? 1.0 : 0.0) + scale * rng.normal();
    return p;
}

} // namespace mosaic
