// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace mosaic {

/// Canvas/token-grid configuration. The canvas is a square of
/// canvas_side_px pixels cut into patch_side_px patches, giving a token
/// grid of base_tokens per side.
struct GridConfig {
    int canvas_side_px = 0;  // S
    int patch_side_px = 0;   // p
    int base_tokens = 0;     // T_base = S / p
    int min_token_width = 0; // d_min, smallest usable window token width

    /// Validates S % p == 0, d_min >= 2 and even; throws ConfigError.
    static GridConfig make(int canvas_side_px, int patch_side_px, int min_token_width);
};

/// Legal window token widths: even divisors of base_tokens, >= d_min,
/// strictly ascending. Divisibility keeps every window corner on the shared
/// token grid across scales; evenness makes the 50% token stride integral.
struct AdmissibleSet {
    std::vector<int> widths;
};

/// Full derived geometry of one window scale.
struct ScalePlan {
    int scale_id = 0;
    double nominal_width_px = 0.0;
    int patch_side_px = 0;    // p, copied from the grid config
    int base_tokens = 0;      // T_base, copied from the grid config
    int token_width = 0;      // t_s, snapped
    int window_px = 0;        // w_s = t_s * p
    int token_stride = 0;     // tau_s = t_s / 2
    int pixel_stride = 0;     // delta_s = tau_s * p
    int windows_per_side = 0; // N_side = 2 * T_base / t_s - 1
    std::vector<int> start_positions_tok; // {0, tau, ..., T_base - t_s}
};

/// One window placement; (row, col) lattice index with both token and pixel
/// coordinates of the top-left corner.
struct WindowRect {
    int row = 0;
    int col = 0;
    int top_tok = 0;
    int left_tok = 0;
    int side_tok = 0;
    int top_px = 0;
    int left_px = 0;
    int side_px = 0;
};

/// Even divisors of T_base that are >= d_min, ascending.
/// Throws Error when the set is empty (T_base / d_min misconfiguration).
AdmissibleSet admissible_widths(const GridConfig& cfg);

/// Nearest admissible width to a nominal token width; exact ties resolve to
/// the larger candidate. The comparison 2x vs (lo + hi) is exact in double,
/// so ties behave like the rational rule even for fractional x.
int snap(double nominal_tokens, const AdmissibleSet& adm);

ScalePlan plan_scale(const GridConfig& cfg, double nominal_width_px, int scale_id = 0);

/// All N_side^2 windows in row-major (row, col) order.
std::vector<WindowRect> enumerate_windows(const ScalePlan& plan);

/// Raw token count contributed by one scale per layer: (2*T_base - t_s)^2.
/// Asserts the identity with N_side^2 * t_s^2.
long long token_count(const ScalePlan& plan, const GridConfig& cfg);

/// Per-token window coverage counts for one or more scales.
struct CoverageReport {
    struct PerScale {
        int scale_id = 0;
        int token_width = 0;
        int min_coverage = 0;
        int max_coverage = 0;
        std::vector<int> counts; // T_base * T_base, row-major
    };
    std::vector<PerScale> scales;
};

/// Confirms every window corner of every plan lies on the token grid inside
/// [0, T_base] and every token is covered at every scale. Throws Error with
/// the offending scale and corner on violation.
CoverageReport validate_cross_scale(const std::vector<ScalePlan>& plans, const GridConfig& cfg);

} // namespace mosaic
