// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mosaic/affine.hpp"
#include "mosaic/image.hpp"
#include "mosaic/stitcher.hpp"

namespace mosaic {

/// Seeded stand-in for the vision encoder. Block 1 maps each flattened
/// p x p x 3 pixel patch to feature_dim; blocks 2..max(layer_ids) map
/// feature_dim to feature_dim. Every block is its own affine map followed
/// by tanh, so the output at layer L is L composed blocks and deeper
/// layers are genuinely different functions. Tokens are processed
/// independently (no mixing).
struct BackboneParams {
    uint64_t seed = 0;
    int feature_dim = 0; // d_vit
    int patch_side = 0;  // p
    int input_side = 0;  // fixed encoder input side, divisible by p
    std::vector<int> layer_ids; // ascending, >= 1
    std::vector<AffineParams> blocks; // blocks[k] is block k+1

    static BackboneParams make(uint64_t seed, int feature_dim, int patch_side,
                               int input_side, std::vector<int> layer_ids);
};

/// Resize the patch to the encoder input side, patchify, and run the block
/// stack; returns one token grid per requested layer id. Deterministic in
/// (patch, seed).
std::map<int, PatchFeatureGrid> encode_patch(const Image& patch, const BackboneParams& bp);

/// Resize to (low_h, low_w) and encode with the deepest configured block;
/// returns (low_h/p)*(low_w/p) tokens in raster order, flat.
std::vector<double> encode_global(const Image& img, const BackboneParams& bp,
                                  int low_h, int low_w);

/// Mean-pool a token grid down to out_side (grid side must be an integer
/// multiple of out_side). Adapts the fixed encoder grid to a scale's
/// window token width before stitching.
PatchFeatureGrid pool_grid(const PatchFeatureGrid& grid, int out_side);

} // namespace mosaic
