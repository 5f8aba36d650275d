// SPDX-License-Identifier: Apache-2.0
#include "mosaic/geometry.hpp"

#include <algorithm>

#include "mosaic/error.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

GridConfig GridConfig::make(int canvas_side_px, int patch_side_px, int min_token_width) {
    if (canvas_side_px < 1 || patch_side_px < 1)
        throw ConfigError(strfmt("grid: canvas side %d and patch side %d must be positive",
                                 canvas_side_px, patch_side_px));
    if (canvas_side_px % patch_side_px != 0)
        throw ConfigError(strfmt("grid: canvas side %d is not divisible by patch side %d",
                                 canvas_side_px, patch_side_px));
    if (min_token_width < 2 || min_token_width % 2 != 0)
        throw ConfigError(strfmt("grid: min token width %d must be even and >= 2", min_token_width));
    GridConfig cfg;
    cfg.canvas_side_px = canvas_side_px;
    cfg.patch_side_px = patch_side_px;
    cfg.base_tokens = canvas_side_px / patch_side_px;
    cfg.min_token_width = min_token_width;
    return cfg;
}

AdmissibleSet admissible_widths(const GridConfig& cfg) {
    AdmissibleSet adm;
    for (int d = cfg.min_token_width; d <= cfg.base_tokens; ++d) {
        if (d % 2 == 0 && cfg.base_tokens % d == 0)
            adm.widths.push_back(d);
    }
    if (adm.widths.empty())
        throw Error(strfmt("admissible set is empty: no even divisor of T_base=%d is >= d_min=%d",
                           cfg.base_tokens, cfg.min_token_width));
    return adm;
}

int snap(double nominal_tokens, const AdmissibleSet& adm) {
    if (adm.widths.empty())
        throw Error("snap: empty admissible set");
    if (!(nominal_tokens > 0.0))
        throw Error("snap: nominal token width must be positive");
    const auto& w = adm.widths;
    if (nominal_tokens <= w.front())
        return w.front();
    if (nominal_tokens >= w.back())
        return w.back();
    auto it = std::lower_bound(w.begin(), w.end(), nominal_tokens);
    const int hi = *it;
    const int lo = *(it - 1);
    // |x - lo| < |hi - x|  <=>  2x < lo + hi; both sides exact in double,
    // so an exact tie (2x == lo + hi) is detected and resolved upward.
    const double twice = 2.0 * nominal_tokens;
    const double mid = static_cast<double>(lo) + static_cast<double>(hi);
    return twice < mid ? lo : hi;
}

ScalePlan plan_scale(const GridConfig& cfg, double nominal_width_px, int scale_id) {
    if (!(nominal_width_px > 0.0))
        throw ConfigError(strfmt("scale %d: nominal window width must be positive", scale_id));
    const AdmissibleSet adm = admissible_widths(cfg);
    ScalePlan plan;
    plan.scale_id = scale_id;
    plan.nominal_width_px = nominal_width_px;
    plan.patch_side_px = cfg.patch_side_px;
    plan.base_tokens = cfg.base_tokens;
    plan.token_width = snap(nominal_width_px / cfg.patch_side_px, adm);
    plan.window_px = plan.token_width * cfg.patch_side_px;
    plan.token_stride = plan.token_width / 2;
    plan.pixel_stride = plan.token_stride * cfg.patch_side_px;
    plan.windows_per_side = 2 * (cfg.base_tokens / plan.token_width) - 1;
    for (int s = 0; s + plan.token_width <= cfg.base_tokens; s += plan.token_stride)
        plan.start_positions_tok.push_back(s);
    // t_s | T_base guarantees the lattice ends exactly on the grid edge
    if (static_cast<int>(plan.start_positions_tok.size()) != plan.windows_per_side ||
        plan.start_positions_tok.back() + plan.token_width != cfg.base_tokens)
        throw Error(strfmt("scale %d: window lattice does not close on the token grid", scale_id));
    return plan;
}

std::vector<WindowRect> enumerate_windows(const ScalePlan& plan) {
    std::vector<WindowRect> rects;
    rects.reserve(static_cast<size_t>(plan.windows_per_side) * plan.windows_per_side);
    for (int i = 0; i < plan.windows_per_side; ++i) {
        for (int j = 0; j < plan.windows_per_side; ++j) {
            WindowRect r;
            r.row = i;
            r.col = j;
            r.top_tok = plan.start_positions_tok[i];
            r.left_tok = plan.start_positions_tok[j];
            r.side_tok = plan.token_width;
            r.top_px = r.top_tok * plan.patch_side_px;
            r.left_px = r.left_tok * plan.patch_side_px;
            r.side_px = plan.window_px;
            rects.push_back(r);
        }
    }
    return rects;
}

long long token_count(const ScalePlan& plan, const GridConfig& cfg) {
    const long long t = plan.token_width;
    const long long tb = cfg.base_tokens;
    const long long direct = (2 * tb - t) * (2 * tb - t);
    const long long n_side = plan.windows_per_side;
    const long long via_windows = n_side * n_side * t * t;
    if (direct != via_windows)
        throw Error(strfmt("token count identity violated at scale %d: %lld != %lld",
                           plan.scale_id, direct, via_windows));
    return direct;
}

CoverageReport validate_cross_scale(const std::vector<ScalePlan>& plans, const GridConfig& cfg) {
    if (plans.empty())
        throw Error("validate_cross_scale: need at least one plan");
    const int tb = cfg.base_tokens;
    CoverageReport report;
    for (const auto& plan : plans) {
        const int t = plan.token_width;
        // Corner lattice checks first: every corner an integer token
        // coordinate in [0, T_base], start set closes exactly on the edge.
        for (int s : plan.start_positions_tok) {
            if (s < 0 || s + t > tb)
                throw Error(strfmt("scale %d: window corner %d..%d leaves the token grid [0, %d]",
                                   plan.scale_id, s, s + t, tb));
        }
        if (plan.start_positions_tok.empty() || plan.start_positions_tok.front() != 0)
            throw Error(strfmt("scale %d: window lattice does not start at corner 0", plan.scale_id));
        for (size_t k = 1; k < plan.start_positions_tok.size(); ++k) {
            const int step = plan.start_positions_tok[k] - plan.start_positions_tok[k - 1];
            if (step != plan.token_stride)
                throw Error(strfmt("scale %d: corner %d breaks the stride lattice (step %d != %d)",
                                   plan.scale_id, plan.start_positions_tok[k], step,
                                   plan.token_stride));
        }
        if (plan.start_positions_tok.back() + t != tb)
            throw Error(strfmt("scale %d: last window corner ends at token %d, expected %d",
                               plan.scale_id, plan.start_positions_tok.back() + t, tb));
        if (plan.token_stride * 2 != t)
            throw Error(strfmt("scale %d: token stride %d is not half of width %d",
                               plan.scale_id, plan.token_stride, t));
        if (tb % t != 0)
            throw Error(strfmt("scale %d: token width %d does not divide T_base=%d",
                               plan.scale_id, t, tb));

        // Brute-force per-token coverage.
        CoverageReport::PerScale per;
        per.scale_id = plan.scale_id;
        per.token_width = t;
        per.counts.assign(static_cast<size_t>(tb) * tb, 0);
        for (int su : plan.start_positions_tok)
            for (int sv : plan.start_positions_tok)
                for (int u = su; u < su + t; ++u)
                    for (int v = sv; v < sv + t; ++v)
                        per.counts[static_cast<size_t>(u) * tb + v]++;
        per.min_coverage = *std::min_element(per.counts.begin(), per.counts.end());
        per.max_coverage = *std::max_element(per.counts.begin(), per.counts.end());
        if (per.min_coverage < 1)
            throw Error(strfmt("scale %d: token grid not fully covered (min coverage 0)",
                               plan.scale_id));
        report.scales.push_back(std::move(per));
    }
    return report;
}

} // namespace mosaic
