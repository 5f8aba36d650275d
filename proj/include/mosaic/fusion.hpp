// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "mosaic/affine.hpp"
#include "mosaic/stacks.hpp"

namespace mosaic {

struct LayerNormParams {
    std::vector<double> gain;
    std::vector<double> bias;
};

/// Per-token layer norm over the feature dimension, eps = 1e-5.
void layer_norm(const double* x, double* y, int dim, const LayerNormParams& ln);

inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Max-subtracted softmax.
std::vector<double> softmax(const std::vector<double>& logits);

/// Global tokens plus all detail stacks after the shared projector, laid
/// out [vis, D_1, ..., D_N] with every segment exactly seq_len tokens.
struct ProjectedTokens {
    int seq_len = 0;  // T_v
    int n_stacks = 0;
    int dim = 0;      // d_llm
    std::vector<double> tokens; // (1 + n_stacks) * seq_len * dim

    double* vis_token(int t) { return tokens.data() + static_cast<size_t>(t) * dim; }
    const double* vis_token(int t) const {
        return tokens.data() + static_cast<size_t>(t) * dim;
    }
    double* stack_token(int i, int t) {
        return tokens.data() + (static_cast<size_t>(1 + i) * seq_len + t) * dim;
    }
    const double* stack_token(int i, int t) const {
        return tokens.data() + (static_cast<size_t>(1 + i) * seq_len + t) * dim;
    }
    const double* stack_base(int i) const {
        return tokens.data() + static_cast<size_t>(1 + i) * seq_len * dim;
    }
};

/// Decoder hidden states with a marked contiguous visual subsequence.
struct HiddenState {
    int total = 0;     // T
    int dim = 0;       // d_llm
    int vis_begin = 0;
    int vis_len = 0;   // T_v
    std::vector<double> h; // total * dim

    double* token(int t) { return h.data() + static_cast<size_t>(t) * dim; }
    const double* token(int t) const { return h.data() + static_cast<size_t>(t) * dim; }
    std::span<const double> vis() const {
        return {h.data() + static_cast<size_t>(vis_begin) * dim,
                static_cast<size_t>(vis_len) * dim};
    }
};

/// Router / gate / projection / residual parameters of one decoder layer.
/// residual_scale starts at 0 so an untouched parameter set leaves the
/// decoder exactly baseline.
struct LayerInjectionParams {
    AffineParams router_q;    // d_llm -> d_llm
    AffineParams router_k;    // d_llm -> d_llm
    AffineParams gate;        // 2*d_llm -> d_llm, sigmoid applied after
    AffineParams detail_proj; // d_llm -> d_llm
    LayerNormParams ln_hidden;
    LayerNormParams ln_detail;
    double residual_scale = 0.0; // s_l
};

/// One toy decoder layer: layer norm, causal-window token mixing, tanh,
/// residual.
struct DecoderLayerParams {
    LayerNormParams ln;
    std::vector<AffineParams> mix; // mix[k] applies to token t-k; zero biases
    std::vector<double> bias;      // d_llm
};

/// Everything seeded: shared projector, text prefix embedding, decoder
/// stack, and injection parameters for every layer (so different
/// inject-layer subsets share identical weights).
struct FusionParams {
    uint64_t seed = 0;
    int d_vit = 0;
    int d_llm = 0;
    int n_layers = 0;
    int text_tokens = 0;
    int mix_window = 4;
    AffineParams projector; // d_vit -> d_llm, shared across segments
    std::vector<double> text_embed; // text_tokens * d_llm
    std::vector<DecoderLayerParams> decoder;     // index l-1 for layer l
    std::vector<LayerInjectionParams> inject;    // index l-1 for layer l

    static FusionParams make(uint64_t seed, int d_vit, int d_llm, int n_layers,
                             int text_tokens, int mix_window = 4);
};

/// Concat [G, D_1..D_N] along the token axis and apply the shared
/// projector token-wise. Throws Error if any stack length differs from the
/// global token count or feature widths disagree.
ProjectedTokens project(const std::vector<double>& global_tokens, int d_vit,
                        const StackBank& bank, const AffineParams& projector);

/// Arithmetic mean over positions of dim-wide vectors.
std::vector<double> summarize(std::span<const double> tokens, int dim);

struct FusedDetail {
    std::vector<double> m;      // seq_len * dim
    std::vector<double> alpha;  // n_stacks, sums to 1
    std::vector<double> logits; // n_stacks, pre-softmax
};

/// Single-head router: Q from the mean visual state, K_i from each stack
/// mean, scores (K_i . Q) / sqrt(d), softmax over stacks shared across
/// positions, M_t = sum_i alpha_i U_i[t].
FusedDetail router_fuse(std::span<const double> h_vis, const ProjectedTokens& u,
                        const LayerInjectionParams& lp);

/// The position-wise assembly step of router_fuse with fixed weights.
std::vector<double> weighted_stack_sum(const ProjectedTokens& u,
                                       const std::vector<double>& alpha);

struct GateDelta {
    std::vector<double> gate;  // seq_len * dim, every entry in (0, 1)
    std::vector<double> delta; // seq_len * dim
};

/// g_t = sigmoid(Gate([LN(h_t); LN(m_t)])), delta_t = g_t ⊙ Proj(LN(m_t)).
GateDelta gate_and_delta(std::span<const double> h_vis, std::span<const double> fused,
                         const LayerInjectionParams& lp);

/// H_new[vis]_t = H[vis]_t + s * delta_t; all other positions bit-identical.
/// s == 0 returns the input unchanged.
HiddenState inject(const HiddenState& h, const std::vector<double>& delta, double residual_scale);

struct LayerTrace {
    int layer = 0;        // 0 is the embedding row
    HiddenState h;        // state after this layer (post-injection)
    bool fused = false;   // router evaluated at this layer
    bool injected = false;
    std::vector<double> alpha;
    std::vector<double> fused_detail; // M, seq_len * dim
    double delta_l2 = 0.0;
    HiddenState h_pre_inject; // populated only when injected
};

struct DecoderTrace {
    ProjectedTokens u;
    std::vector<LayerTrace> layers; // n_layers + 1 entries
};

/// Runs the toy decoder over [text_embed; U_vis]. U is projected once and
/// reused at every fusion site. Layers in inject_layers get
/// fuse -> gate -> inject applied to their output; layers in record_layers
/// additionally evaluate the router without modifying the state (for
/// probing). Throws Error on out-of-range layer indices.
DecoderTrace decoder_forward(const std::vector<double>& global_tokens, int d_vit,
                             std::span<const double> text_embed, const StackBank& bank,
                             const FusionParams& fp, const std::set<int>& inject_layers,
                             const std::set<int>& record_layers = {});

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Mean cosine similarity between the final-layer visual slice and each
/// recorded fused detail M.
double retention_score(const DecoderTrace& trace);

} // namespace mosaic
