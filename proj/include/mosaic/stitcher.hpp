// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "mosaic/geometry.hpp"

namespace mosaic {

/// Token features of one window: a side x side grid of dim-wide vectors,
/// row-major token-major. side must equal the plan's token width before
/// stitching.
struct PatchFeatureGrid {
    int scale_id = 0;
    int layer_id = 0;
    int win_row = 0;
    int win_col = 0;
    int side = 0;
    int dim = 0;
    std::vector<double> data; // side * side * dim

    double* at(int u, int v) {
        return data.data() + (static_cast<size_t>(u) * side + v) * dim;
    }
    const double* at(int u, int v) const {
        return data.data() + (static_cast<size_t>(u) * side + v) * dim;
    }
};

/// Token-grid of features at canvas resolution for one (scale, layer) pair,
/// with the accumulated stitch weights kept alongside.
struct FeatureCanvas {
    int scale_id = 0;
    int layer_id = 0;
    int side = 0; // T_base
    int dim = 0;  // d_vit
    std::vector<double> features;    // side * side * dim
    std::vector<double> weight_sums; // side * side

    double* at(int u, int v) {
        return features.data() + (static_cast<size_t>(u) * side + v) * dim;
    }
    const double* at(int u, int v) const {
        return features.data() + (static_cast<size_t>(u) * side + v) * dim;
    }
    double weight_at(int u, int v) const {
        return weight_sums[static_cast<size_t>(u) * side + v];
    }
};

/// 1D half-sample-offset Hann taper of length side:
///   h[n] = 0.5 * (1 - cos(2*pi*(n + 0.5) / side))
/// Strictly positive everywhere and mirror-symmetric (built by reflection,
/// so the symmetry is exact in floating point). Adjacent windows at 50%
/// overlap sum to a constant.
std::vector<double> hann_window(int side);

/// Outer product h ⊗ h, row-major side x side.
std::vector<double> hann_weights(int side);

/// Hann-weighted overlap-add of per-window token grids onto the canvas.
/// Per token the result is sum_k (W_k / sum_j W_j) * x_k, i.e. the weighted
/// average of all windows covering it; weight sums are stored alongside.
/// Requires exactly one grid per window of the plan, all with side ==
/// plan.token_width and a common dim. Accumulation runs in fixed row-major
/// window order, so identical inputs give bit-identical canvases.
FeatureCanvas overlap_add(const std::vector<PatchFeatureGrid>& patches, const ScalePlan& plan);

/// Flat binary canvas block: u32 side, u32 dim (little-endian), then
/// side*side*dim little-endian f64 features, row-major token-major.
void dump_canvas(const FeatureCanvas& canvas, std::ostream& os);
FeatureCanvas load_canvas(std::istream& is);

} // namespace mosaic
