// SPDX-License-Identifier: Apache-2.0
#include "mosaic/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "mosaic/error.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

BackboneParams BackboneParams::make(uint64_t seed, int feature_dim, int patch_side,
                                    int input_side, std::vector<int> layer_ids) {
    if (feature_dim < 1)
        throw ConfigError(strfmt("backbone: feature dim %d must be >= 1", feature_dim));
    if (patch_side < 1 || input_side < patch_side || input_side % patch_side != 0)
        throw ConfigError(strfmt("backbone: input side %d not divisible by patch side %d",
                                 input_side, patch_side));
    if (layer_ids.empty())
        throw ConfigError("backbone: need at least one layer id");
    std::sort(layer_ids.begin(), layer_ids.end());
    if (layer_ids.front() < 1)
        throw ConfigError(strfmt("backbone: layer id %d must be >= 1", layer_ids.front()));
    if (std::adjacent_find(layer_ids.begin(), layer_ids.end()) != layer_ids.end())
        throw ConfigError("backbone: duplicate layer ids");

    BackboneParams bp;
    bp.seed = seed;
    bp.feature_dim = feature_dim;
    bp.patch_side = patch_side;
    bp.input_side = input_side;
    bp.layer_ids = std::move(layer_ids);

    const int depth = bp.layer_ids.back();
    const int pixel_dim = patch_side * patch_side * 3;
    Rng rng(splitmix64(seed ^ 0x6261636b626f6eULL));
    bp.blocks.reserve(depth);
    bp.blocks.push_back(random_affine(rng, feature_dim, pixel_dim));
    for (int k = 1; k < depth; ++k)
        bp.blocks.push_back(random_affine(rng, feature_dim, feature_dim));
    return bp;
}

namespace {

void tanh_inplace(std::vector<double>& v) {
    for (double& x : v)
        x = std::tanh(x);
}

// run the block stack on one flattened pixel token, capturing requested layers
void encode_token(const BackboneParams& bp, const std::vector<double>& pixel_vec,
                  std::vector<std::vector<double>>& out_per_layer) {
    std::vector<double> cur(bp.feature_dim);
    bp.blocks[0].apply(pixel_vec.data(), cur.data());
    tanh_inplace(cur);
    size_t out_idx = 0;
    std::vector<double> next(bp.feature_dim);
    for (int layer = 1; layer <= bp.layer_ids.back(); ++layer) {
        if (layer > 1) {
            bp.blocks[layer - 1].apply(cur.data(), next.data());
            tanh_inplace(next);
            cur.swap(next);
        }
        if (out_idx < bp.layer_ids.size() && bp.layer_ids[out_idx] == layer) {
            out_per_layer[out_idx] = cur;
            ++out_idx;
        }
    }
}

} // namespace

std::map<int, PatchFeatureGrid> encode_patch(const Image& patch, const BackboneParams& bp) {
    const Image sized = resize_bilinear(patch, bp.input_side, bp.input_side);
    const int p = bp.patch_side;
    const int grid_side = bp.input_side / p;

    std::map<int, PatchFeatureGrid> out;
    for (int layer : bp.layer_ids) {
        PatchFeatureGrid g;
        g.layer_id = layer;
        g.side = grid_side;
        g.dim = bp.feature_dim;
        g.data.resize(static_cast<size_t>(grid_side) * grid_side * bp.feature_dim);
        out.emplace(layer, std::move(g));
    }

    std::vector<double> pixel_vec(static_cast<size_t>(p) * p * 3);
    std::vector<std::vector<double>> per_layer(bp.layer_ids.size());
    for (int tu = 0; tu < grid_side; ++tu) {
        for (int tv = 0; tv < grid_side; ++tv) {
            size_t k = 0;
            for (int dy = 0; dy < p; ++dy) {
                const double* row = sized.at(tu * p + dy, tv * p);
                for (int i = 0; i < p * 3; ++i)
                    pixel_vec[k++] = row[i];
            }
            encode_token(bp, pixel_vec, per_layer);
            for (size_t li = 0; li < bp.layer_ids.size(); ++li) {
                double* dst = out.at(bp.layer_ids[li]).at(tu, tv);
                std::copy(per_layer[li].begin(), per_layer[li].end(), dst);
            }
        }
    }
    return out;
}

std::vector<double> encode_global(const Image& img, const BackboneParams& bp,
                                  int low_h, int low_w) {
    if (low_h < bp.patch_side || low_w < bp.patch_side ||
        low_h % bp.patch_side != 0 || low_w % bp.patch_side != 0)
        throw Error(strfmt("encode_global: low-res %dx%d not divisible by patch side %d",
                           low_h, low_w, bp.patch_side));
    const Image sized = resize_bilinear(img, low_h, low_w);
    const int p = bp.patch_side;
    const int rows = low_h / p;
    const int cols = low_w / p;

    // deepest configured block only
    BackboneParams final_only = bp;
    final_only.layer_ids = {bp.layer_ids.back()};

    std::vector<double> tokens(static_cast<size_t>(rows) * cols * bp.feature_dim);
    std::vector<double> pixel_vec(static_cast<size_t>(p) * p * 3);
    std::vector<std::vector<double>> per_layer(1);
    for (int tu = 0; tu < rows; ++tu) {
        for (int tv = 0; tv < cols; ++tv) {
            size_t k = 0;
            for (int dy = 0; dy < p; ++dy) {
                const double* row = sized.at(tu * p + dy, tv * p);
                for (int i = 0; i < p * 3; ++i)
                    pixel_vec[k++] = row[i];
            }
            encode_token(final_only, pixel_vec, per_layer);
            std::copy(per_layer[0].begin(), per_layer[0].end(),
                      tokens.begin() + (static_cast<size_t>(tu) * cols + tv) * bp.feature_dim);
        }
    }
    return tokens;
}

PatchFeatureGrid pool_grid(const PatchFeatureGrid& grid, int out_side) {
    if (out_side < 1 || grid.side % out_side != 0)
        throw Error(strfmt("pool_grid: grid side %d not an integer multiple of %d",
                           grid.side, out_side));
    const int factor = grid.side / out_side;
    if (factor == 1)
        return grid;
    PatchFeatureGrid out;
    out.scale_id = grid.scale_id;
    out.layer_id = grid.layer_id;
    out.win_row = grid.win_row;
    out.win_col = grid.win_col;
    out.side = out_side;
    out.dim = grid.dim;
    out.data.assign(static_cast<size_t>(out_side) * out_side * grid.dim, 0.0);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    const auto& ops = kernels::active();
    for (int u = 0; u < out_side; ++u) {
        for (int v = 0; v < out_side; ++v) {
            double* dst = out.at(u, v);
            for (int du = 0; du < factor; ++du)
                for (int dv = 0; dv < factor; ++dv)
                    ops.axpy(dst, grid.at(u * factor + du, v * factor + dv), inv,
                             static_cast<size_t>(grid.dim));
        }
    }
    return out;
}

} // namespace mosaic
