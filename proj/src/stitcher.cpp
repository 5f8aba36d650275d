// SPDX-License-Identifier: Apache-2.0
#include "mosaic/stitcher.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "mosaic/error.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

std::vector<double> hann_window(int side) {
    if (side < 2 || side % 2 != 0)
        throw Error(strfmt("hann_window: side %d must be even and >= 2", side));
    std::vector<double> h(side);
    const double tau = 6.28318530717958647692; // 2*pi
    for (int n = 0; n < side / 2; ++n) {
        const double v = 0.5 * (1.0 - std::cos(tau * (n + 0.5) / side));
        h[n] = v;
        h[side - 1 - n] = v; // mirror so the symmetry is exact
    }
    return h;
}

std::vector<double> hann_weights(int side) {
    const std::vector<double> h = hann_window(side);
    std::vector<double> w(static_cast<size_t>(side) * side);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            w[static_cast<size_t>(i) * side + j] = h[i] * h[j];
    return w;
}

FeatureCanvas overlap_add(const std::vector<PatchFeatureGrid>& patches, const ScalePlan& plan) {
    const int n_side = plan.windows_per_side;
    const int t = plan.token_width;
    const int tb = plan.base_tokens;
    const size_t n_win = static_cast<size_t>(n_side) * n_side;
    if (patches.empty())
        throw Error("stitch: no patches");
    if (static_cast<int>(plan.start_positions_tok.size()) != n_side)
        throw Error(strfmt("stitch: plan has %zu start positions for %d windows per side",
                           plan.start_positions_tok.size(), n_side));
    for (int s : plan.start_positions_tok)
        if (s < 0 || s + t > tb)
            throw Error(strfmt("stitch: window start %d leaves the %d-token canvas", s, tb));

    // Index patches by lattice position; reject duplicates and mismatches.
    std::vector<const PatchFeatureGrid*> by_pos(n_win, nullptr);
    int dim = -1;
    for (const auto& p : patches) {
        if (p.win_row < 0 || p.win_row >= n_side || p.win_col < 0 || p.win_col >= n_side)
            throw Error(strfmt("stitch: patch window (%d,%d) outside the %dx%d lattice",
                               p.win_row, p.win_col, n_side, n_side));
        const size_t idx = static_cast<size_t>(p.win_row) * n_side + p.win_col;
        if (by_pos[idx])
            throw Error(strfmt("stitch: duplicate patch for window (%d,%d)", p.win_row, p.win_col));
        if (p.side != t)
            throw Error(strfmt("stitch: window (%d,%d) grid side %d != plan token width %d",
                               p.win_row, p.win_col, p.side, t));
        if (dim < 0)
            dim = p.dim;
        else if (p.dim != dim)
            throw Error(strfmt("stitch: window (%d,%d) feature width %d != %d",
                               p.win_row, p.win_col, p.dim, dim));
        by_pos[idx] = &p;
    }
    for (size_t idx = 0; idx < n_win; ++idx) {
        if (!by_pos[idx])
            throw Error(strfmt("stitch: missing patch for window (%d,%d)",
                               static_cast<int>(idx) / n_side, static_cast<int>(idx) % n_side));
    }

    FeatureCanvas canvas;
    canvas.scale_id = patches.front().scale_id;
    canvas.layer_id = patches.front().layer_id;
    canvas.side = tb;
    canvas.dim = dim;
    canvas.features.assign(static_cast<size_t>(tb) * tb * dim, 0.0);
    canvas.weight_sums.assign(static_cast<size_t>(tb) * tb, 0.0);

    const std::vector<double> w = hann_weights(t);

    // Pass 1: accumulate the per-token weight sums.
    for (int i = 0; i < n_side; ++i) {
        const int top = plan.start_positions_tok[i];
        for (int j = 0; j < n_side; ++j) {
            const int left = plan.start_positions_tok[j];
            for (int lu = 0; lu < t; ++lu)
                for (int lv = 0; lv < t; ++lv)
                    canvas.weight_sums[static_cast<size_t>(top + lu) * tb + (left + lv)] +=
                        w[static_cast<size_t>(lu) * t + lv];
        }
    }
    for (double ws : canvas.weight_sums) {
        if (!(ws > 0.0))
            throw Error("stitch: zero weight sum at a canvas token"); // unreachable for valid plans
    }

    // Pass 2: scatter normalized contributions in fixed row-major window
    // order. Normalizing each weight by the token's accumulated sum keeps
    // the single-window case exact (w / w == 1).
    const auto& ops = kernels::active();
    for (int i = 0; i < n_side; ++i) {
        const int top = plan.start_positions_tok[i];
        for (int j = 0; j < n_side; ++j) {
            const int left = plan.start_positions_tok[j];
            const PatchFeatureGrid& p = *by_pos[static_cast<size_t>(i) * n_side + j];
            for (int lu = 0; lu < t; ++lu) {
                for (int lv = 0; lv < t; ++lv) {
                    const int u = top + lu;
                    const int v = left + lv;
                    const double wn = w[static_cast<size_t>(lu) * t + lv] / canvas.weight_at(u, v);
                    ops.axpy(canvas.at(u, v), p.at(lu, lv), wn, static_cast<size_t>(dim));
                }
            }
        }
    }

    for (double f : canvas.features) {
        if (!std::isfinite(f))
            throw Error("stitch: non-finite feature value on the canvas");
    }
    return canvas;
}

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is)
        throw Error("canvas load: truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k)
        b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is)
        throw Error("canvas load: truncated payload");
    uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
        bits |= static_cast<uint64_t>(b[k]) << (8 * k);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

void dump_canvas(const FeatureCanvas& canvas, std::ostream& os) {
    put_u32(os, static_cast<uint32_t>(canvas.side));
    put_u32(os, static_cast<uint32_t>(canvas.dim));
    for (double v : canvas.features)
        put_f64(os, v);
}

FeatureCanvas load_canvas(std::istream& is) {
    FeatureCanvas canvas;
    canvas.side = static_cast<int>(get_u32(is));
    canvas.dim = static_cast<int>(get_u32(is));
    canvas.features.resize(static_cast<size_t>(canvas.side) * canvas.side * canvas.dim);
    for (auto& v : canvas.features)
        v = get_f64(is);
    canvas.weight_sums.assign(static_cast<size_t>(canvas.side) * canvas.side, 1.0);
    return canvas;
}

} // namespace mosaic
