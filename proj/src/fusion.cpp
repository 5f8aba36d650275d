// SPDX-License-Identifier: Apache-2.0
#include "mosaic/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "mosaic/error.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

namespace {
constexpr double kLnEps = 1e-5;
}

void layer_norm(const double* x, double* y, int dim, const LayerNormParams& ln) {
    double mean = 0.0;
    for (int i = 0; i < dim; ++i)
        mean += x[i];
    mean /= dim;
    double var = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = x[i] - mean;
        var += d * d;
    }
    var /= dim;
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    for (int i = 0; i < dim; ++i)
        y[i] = ln.gain[i] * ((x[i] - mean) * inv) + ln.bias[i];
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty())
        throw Error("softmax: empty input");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out)
        v /= sum;
    return out;
}

namespace {

LayerNormParams default_ln(int dim) {
    LayerNormParams ln;
    ln.gain.assign(dim, 1.0);
    ln.bias.assign(dim, 0.0);
    return ln;
}

} // namespace

FusionParams FusionParams::make(uint64_t seed, int d_vit, int d_llm, int n_layers,
                                int text_tokens, int mix_window) {
    if (d_vit < 1 || d_llm < 1 || n_layers < 1 || text_tokens < 1 || mix_window < 1)
        throw ConfigError("fusion: all dimensions must be >= 1");
    FusionParams fp;
    fp.seed = seed;
    fp.d_vit = d_vit;
    fp.d_llm = d_llm;
    fp.n_layers = n_layers;
    fp.text_tokens = text_tokens;
    fp.mix_window = mix_window;

    Rng rng(splitmix64(seed ^ 0x66757365ULL));
    fp.projector = random_affine(rng, d_llm, d_vit);
    fp.text_embed.resize(static_cast<size_t>(text_tokens) * d_llm);
    for (auto& v : fp.text_embed)
        v = rng.normal();

    for (int l = 0; l < n_layers; ++l) {
        DecoderLayerParams dl;
        dl.ln = default_ln(d_llm);
        dl.bias.resize(d_llm);
        for (auto& v : dl.bias)
            v = 0.1 * rng.normal();
        for (int k = 0; k < mix_window; ++k) {
            AffineParams m = random_affine(rng, d_llm, d_llm, 1.0, 0.0);
            m.b.assign(d_llm, 0.0);
            dl.mix.push_back(std::move(m));
        }
        fp.decoder.push_back(std::move(dl));

        LayerInjectionParams lp;
        lp.router_q = random_affine(rng, d_llm, d_llm);
        lp.router_k = random_affine(rng, d_llm, d_llm);
        lp.gate = random_affine(rng, d_llm, 2 * d_llm, 1.0, 0.0);
        // near-identity detail path: the untrained projection passes the
        // normalized detail through instead of scrambling its direction
        lp.detail_proj = near_identity_affine(rng, d_llm, 0.05);
        lp.ln_hidden = default_ln(d_llm);
        lp.ln_detail = default_ln(d_llm);
        lp.residual_scale = 0.0;
        fp.inject.push_back(std::move(lp));
    }
    return fp;
}

ProjectedTokens project(const std::vector<double>& global_tokens, int d_vit,
                        const StackBank& bank, const AffineParams& projector) {
    if (d_vit < 1 || global_tokens.size() % static_cast<size_t>(d_vit) != 0)
        throw Error("project: global token buffer not a multiple of the feature width");
    const int t_v = static_cast<int>(global_tokens.size() / static_cast<size_t>(d_vit));
    if (t_v < 1)
        throw Error("project: no global tokens");
    if (projector.cols != d_vit)
        throw Error(strfmt("project: projector expects width %d, got %d", projector.cols, d_vit));
    for (size_t i = 0; i < bank.stacks.size(); ++i) {
        const auto& st = bank.stacks[i];
        if (st.length != t_v)
            throw Error(strfmt("project: stack %zu length %d != global token count %d",
                               i, st.length, t_v));
        if (st.dim != d_vit)
            throw Error(strfmt("project: stack %zu feature width %d != %d", i, st.dim, d_vit));
    }

    ProjectedTokens u;
    u.seq_len = t_v;
    u.n_stacks = static_cast<int>(bank.stacks.size());
    u.dim = projector.rows;
    u.tokens.resize(static_cast<size_t>(1 + u.n_stacks) * t_v * u.dim);

    for (int t = 0; t < t_v; ++t)
        projector.apply(global_tokens.data() + static_cast<size_t>(t) * d_vit, u.vis_token(t));
    for (int i = 0; i < u.n_stacks; ++i)
        for (int t = 0; t < t_v; ++t)
            projector.apply(bank.stacks[i].at(t), u.stack_token(i, t));
    return u;
}

std::vector<double> summarize(std::span<const double> tokens, int dim) {
    if (tokens.empty() || dim < 1 || tokens.size() % static_cast<size_t>(dim) != 0)
        throw Error("summarize: empty input or length not a multiple of dim");
    const size_t count = tokens.size() / static_cast<size_t>(dim);
    std::vector<double> mean(dim, 0.0);
    const auto& ops = kernels::active();
    for (size_t t = 0; t < count; ++t)
        ops.axpy(mean.data(), tokens.data() + t * dim, 1.0, static_cast<size_t>(dim));
    ops.scale(mean.data(), mean.data(), 1.0 / static_cast<double>(count),
              static_cast<size_t>(dim));
    return mean;
}

std::vector<double> weighted_stack_sum(const ProjectedTokens& u,
                                       const std::vector<double>& alpha) {
    if (static_cast<int>(alpha.size()) != u.n_stacks)
        throw Error("weighted_stack_sum: weight count != stack count");
    std::vector<double> m(static_cast<size_t>(u.seq_len) * u.dim, 0.0);
    const auto& ops = kernels::active();
    for (int i = 0; i < u.n_stacks; ++i)
        ops.axpy(m.data(), u.stack_base(i), alpha[i],
                 static_cast<size_t>(u.seq_len) * u.dim);
    return m;
}

FusedDetail router_fuse(std::span<const double> h_vis, const ProjectedTokens& u,
                        const LayerInjectionParams& lp) {
    const int d = u.dim;
    if (h_vis.size() != static_cast<size_t>(u.seq_len) * d)
        throw Error(strfmt("router_fuse: visual slice has %zu values, expected %d x %d",
                           h_vis.size(), u.seq_len, d));
    if (u.n_stacks < 1)
        throw Error("router_fuse: no stacks");

    const std::vector<double> h_mean = summarize(h_vis, d);
    std::vector<double> q(d);
    lp.router_q.apply(h_mean.data(), q.data());

    FusedDetail out;
    out.logits.resize(u.n_stacks);
    std::vector<double> k(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const auto& ops = kernels::active();
    for (int i = 0; i < u.n_stacks; ++i) {
        const std::vector<double> u_mean = summarize(
            {u.stack_base(i), static_cast<size_t>(u.seq_len) * d}, d);
        lp.router_k.apply(u_mean.data(), k.data());
        out.logits[i] = ops.dot(k.data(), q.data(), static_cast<size_t>(d)) * inv_sqrt_d;
    }
    out.alpha = softmax(out.logits);
    out.m = weighted_stack_sum(u, out.alpha);
    return out;
}

GateDelta gate_and_delta(std::span<const double> h_vis, std::span<const double> fused,
                         const LayerInjectionParams& lp) {
    const int d = lp.detail_proj.rows;
    if (h_vis.size() != fused.size() || h_vis.size() % static_cast<size_t>(d) != 0)
        throw Error("gate_and_delta: shape mismatch");
    const int t_v = static_cast<int>(h_vis.size() / static_cast<size_t>(d));

    GateDelta gd;
    gd.gate.resize(h_vis.size());
    gd.delta.resize(h_vis.size());
    std::vector<double> ln_h(d), ln_m(d), cat(2 * d), pre(d), proj(d);
    const auto& ops = kernels::active();
    for (int t = 0; t < t_v; ++t) {
        const double* h_t = h_vis.data() + static_cast<size_t>(t) * d;
        const double* m_t = fused.data() + static_cast<size_t>(t) * d;
        layer_norm(h_t, ln_h.data(), d, lp.ln_hidden);
        layer_norm(m_t, ln_m.data(), d, lp.ln_detail);
        std::copy(ln_h.begin(), ln_h.end(), cat.begin());
        std::copy(ln_m.begin(), ln_m.end(), cat.begin() + d);
        lp.gate.apply(cat.data(), pre.data());
        double* g_t = gd.gate.data() + static_cast<size_t>(t) * d;
        for (int i = 0; i < d; ++i)
            g_t[i] = stable_sigmoid(pre[i]);
        lp.detail_proj.apply(ln_m.data(), proj.data());
        ops.hadamard(gd.delta.data() + static_cast<size_t>(t) * d, g_t, proj.data(),
                     static_cast<size_t>(d));
    }
    return gd;
}

HiddenState inject(const HiddenState& h, const std::vector<double>& delta,
                   double residual_scale) {
    if (delta.size() != static_cast<size_t>(h.vis_len) * h.dim)
        throw Error(strfmt("inject: delta has %zu values, expected %d x %d", delta.size(),
                           h.vis_len, h.dim));
    HiddenState out = h;
    if (residual_scale == 0.0)
        return out; // keeps the s = 0 trace bit-identical to the baseline
    double* vis = out.h.data() + static_cast<size_t>(out.vis_begin) * out.dim;
    kernels::active().add_scaled(vis, vis, delta.data(), residual_scale, delta.size());
    return out;
}

namespace {

void decoder_layer(const HiddenState& in, HiddenState& out, const DecoderLayerParams& dl,
                   int mix_window) {
    const int d = in.dim;
    out = in;
    std::vector<double> normed(static_cast<size_t>(in.total) * d);
    for (int t = 0; t < in.total; ++t)
        layer_norm(in.token(t), normed.data() + static_cast<size_t>(t) * d, d, dl.ln);

    std::vector<double> acc(d), tmp(d);
    const auto& ops = kernels::active();
    for (int t = 0; t < in.total; ++t) {
        std::copy(dl.bias.begin(), dl.bias.end(), acc.begin());
        for (int k = 0; k < mix_window && t - k >= 0; ++k) {
            dl.mix[k].apply(normed.data() + static_cast<size_t>(t - k) * d, tmp.data());
            ops.axpy(acc.data(), tmp.data(), 1.0, static_cast<size_t>(d));
        }
        double* h_t = out.token(t);
        for (int i = 0; i < d; ++i)
            h_t[i] += std::tanh(acc[i]);
    }
}

} // namespace

DecoderTrace decoder_forward(const std::vector<double>& global_tokens, int d_vit,
                             std::span<const double> text_embed, const StackBank& bank,
                             const FusionParams& fp, const std::set<int>& inject_layers,
                             const std::set<int>& record_layers) {
    for (int l : inject_layers)
        if (l < 1 || l > fp.n_layers)
            throw Error(strfmt("decoder: inject layer %d outside [1, %d]", l, fp.n_layers));
    for (int l : record_layers)
        if (l < 1 || l > fp.n_layers)
            throw Error(strfmt("decoder: record layer %d outside [1, %d]", l, fp.n_layers));
    if (text_embed.size() % static_cast<size_t>(fp.d_llm) != 0)
        throw Error("decoder: text embedding is not a multiple of the hidden width");

    DecoderTrace trace;
    trace.u = project(global_tokens, d_vit, bank, fp.projector);
    const int t_v = trace.u.seq_len;
    const int d = fp.d_llm;
    const int n_text = static_cast<int>(text_embed.size() / static_cast<size_t>(d));

    HiddenState h;
    h.total = n_text + t_v;
    h.dim = d;
    h.vis_begin = n_text;
    h.vis_len = t_v;
    h.h.resize(static_cast<size_t>(h.total) * d);
    std::copy(text_embed.begin(), text_embed.end(), h.h.begin());
    std::copy(trace.u.tokens.begin(),
              trace.u.tokens.begin() + static_cast<size_t>(t_v) * d,
              h.h.begin() + static_cast<size_t>(n_text) * d);

    LayerTrace embed;
    embed.layer = 0;
    embed.h = h;
    trace.layers.push_back(std::move(embed));

    HiddenState next;
    for (int l = 1; l <= fp.n_layers; ++l) {
        decoder_layer(h, next, fp.decoder[l - 1], fp.mix_window);
        h = std::move(next);

        LayerTrace lt;
        lt.layer = l;
        const bool do_inject = inject_layers.count(l) > 0;
        const bool do_record = do_inject || record_layers.count(l) > 0;
        if (do_record) {
            const LayerInjectionParams& lp = fp.inject[l - 1];
            FusedDetail fd = router_fuse(h.vis(), trace.u, lp);
            lt.fused = true;
            lt.alpha = fd.alpha;
            lt.fused_detail = fd.m;
            if (do_inject) {
                GateDelta gd = gate_and_delta(h.vis(), fd.m, lp);
                lt.injected = true;
                lt.delta_l2 = std::sqrt(kernels::active().dot(gd.delta.data(), gd.delta.data(),
                                                              gd.delta.size()));
                lt.h_pre_inject = h;
                h = inject(h, gd.delta, lp.residual_scale);
            }
        }
        lt.h = h;
        trace.layers.push_back(std::move(lt));
    }
    return trace;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw Error("cosine_similarity: size mismatch");
    const auto& ops = kernels::active();
    const double na = std::sqrt(ops.dot(a.data(), a.data(), a.size()));
    const double nb = std::sqrt(ops.dot(b.data(), b.data(), b.size()));
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return ops.dot(a.data(), b.data(), a.size()) / (na * nb);
}

double retention_score(const DecoderTrace& trace) {
    const HiddenState& final_h = trace.layers.back().h;
    const std::span<const double> final_vis = final_h.vis();
    double sum = 0.0;
    int count = 0;
    for (const auto& lt : trace.layers) {
        if (!lt.fused)
            continue;
        sum += cosine_similarity(final_vis, lt.fused_detail);
        ++count;
    }
    if (count == 0)
        throw Error("retention_score: trace has no fused layers");
    return sum / count;
}

} // namespace mosaic
