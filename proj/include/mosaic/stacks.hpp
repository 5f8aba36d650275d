// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mosaic/stitcher.hpp"

namespace mosaic {

/// Residue class (a, b) modulo the downsample factor f; selects one
/// checkerboard phase of the canvas token grid.
struct PhaseOffset {
    int a = 0;
    int b = 0;
};

/// Canvas tokens of one phase, in raster order, before length fitting.
struct PhaseSequence {
    int scale_id = 0;
    int layer_id = 0;
    PhaseOffset phase;
    int dim = 0;
    std::vector<double> tokens;                // length * dim
    std::vector<std::pair<int, int>> coords;   // source (u, v) per position

    int length() const { return static_cast<int>(coords.size()); }
};

/// Fixed-length detail stack: a phase sequence truncated to its raster
/// prefix or zero-padded at the tail to exactly target_len tokens.
struct DetailStack {
    int scale_id = 0;
    int layer_id = 0;
    PhaseOffset phase;
    int length = 0;     // == T_v
    int dim = 0;
    int raw_length = 0; // length before fitting
    std::vector<double> tokens;              // length * dim
    std::vector<std::pair<int, int>> coords; // kept (unpadded) positions only

    const double* at(int t) const { return tokens.data() + static_cast<size_t>(t) * dim; }
};

/// Ordered collection of all detail stacks; lexicographic over
/// (scale, layer, a, b). The order is part of the external contract since
/// router weights are index-sensitive.
struct StackBank {
    std::vector<DetailStack> stacks;
    int factor = 0;    // f
    int stack_len = 0; // T_v
    std::vector<int> scale_ids;
    std::vector<int> layer_ids;
};

/// All f^2 offsets in lexicographic (a, b) order.
std::vector<PhaseOffset> phase_offsets(int factor);

/// Tokens (u, v) with u ≡ a, v ≡ b (mod f), raster order. The f^2 phase
/// sequences of one canvas partition its tokens exactly.
PhaseSequence subsample(const FeatureCanvas& canvas, const PhaseOffset& off, int factor);

DetailStack fit_length(const PhaseSequence& seq, int target_len);

/// Builds the full bank over every (scale, layer) canvas; throws Error
/// naming the missing pair if a canvas is absent.
StackBank build_bank(const std::map<std::pair<int, int>, FeatureCanvas>& canvases,
                     int factor, int stack_len);

/// Bank binary dump: u32 stack count, then per stack the canvas block
/// format (u32 length, u32 dim, little-endian f64 tokens).
void dump_bank(const StackBank& bank, std::ostream& os);

} // namespace mosaic
