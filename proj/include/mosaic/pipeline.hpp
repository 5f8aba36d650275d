// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/backbone.hpp"
#include "mosaic/fusion.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/stacks.hpp"

namespace mosaic {

/// Full end-to-end configuration. Defaults are the desk-scale toy profile.
struct PipelineConfig {
    // geometry
    int canvas_side = 96;
    int patch_side = 8;
    int min_token_width = 2;
    std::vector<double> nominal_widths_px = {32.0, 16.0};
    // encoder
    uint64_t encoder_seed = 1;
    int feature_dim = 16;          // d_vit
    std::vector<int> layer_ids = {1, 2, 3};
    int encoder_side = 32;         // fixed encoder input side
    int global_side = 32;          // low-res side for the global tokens
    // bank
    int downsample = 2;            // f
    int stack_len = 0;             // 0 = derive from the global token count
    // fusion
    int llm_dim = 32;
    int decoder_layers = 8;
    std::vector<int> inject_layers = {2, 4, 6, 8};
    double residual_scale = 1.0;   // s_l applied at the injection layers
    uint64_t fusion_seed = 2;
    int text_tokens = 8;
    // io
    std::string input_path;        // empty: use the synthetic generator
    uint64_t synth_seed = 0;
    int synth_side = 0;            // 0 = canvas_side
    bool dump_canvases = false;

    static PipelineConfig toy();
    static PipelineConfig paper_geometry();

    /// Applies one "key = value" assignment; unknown keys are hard errors.
    void apply_kv(const std::string& key, const std::string& value);
    /// Overlays a line-oriented key=value file onto this config.
    void load_file(const std::string& path);
    /// Fail-fast validation of all derived geometry; throws ConfigError.
    void validate() const;

    int base_tokens() const { return canvas_side / patch_side; }
    int global_token_count() const {
        const int side = global_side / patch_side;
        return side * side;
    }
    int target_stack_len() const { return stack_len > 0 ? stack_len : global_token_count(); }
};

/// Deterministic test image: seeded per-pixel hash noise plus three seeded
/// axis-aligned rectangles with distinct constant colors.
Image synth_image(uint64_t seed, int side, int min_side = 1);

struct PlanRow {
    int scale_id = 0;
    double nominal_px = 0.0;
    int token_width = 0;
    int window_px = 0;
    int token_stride = 0;
    int pixel_stride = 0;
    int windows_per_side = 0;
    long long window_count = 0;
    long long token_count = 0;
};

struct TraceRow {
    int layer = 0;
    double vis_l2 = 0.0;
    bool injected = false;
    double delta_l2 = 0.0;
    std::vector<double> alpha;
};

struct RunReport {
    std::vector<PlanRow> plan;
    int n_stack = 0;
    int stack_len = 0;
    std::vector<int> raw_lengths;          // per stack
    std::vector<std::array<int, 4>> stack_index; // (scale, layer, a, b) per stack
    std::vector<TraceRow> trace;
    std::vector<std::pair<int, double>> retention; // (layer, cosine to fused detail)
    double retention_mean = 0.0;
    std::vector<std::pair<std::string, double>> timings_ms;

    std::string human() const;
    std::string plan_csv() const;
    std::string bank_csv() const;
    std::string trace_csv() const;
    std::string retention_csv() const;
    std::string timings_csv() const;
};

/// Intermediate artifacts up to the stack bank; shared by run and probe.
struct PipelineArtifacts {
    GridConfig grid;
    std::vector<ScalePlan> plans;
    Image canvas_img;
    std::map<std::pair<int, int>, FeatureCanvas> canvases;
    StackBank bank;
    std::vector<double> global_tokens;
    BackboneParams backbone;
    FusionParams fusion;
};

PipelineArtifacts prepare(const PipelineConfig& cfg);

/// Geometry-only plan rows (the plan subcommand / --plan-only path).
std::vector<PlanRow> plan_rows(const PipelineConfig& cfg);

/// Full pipeline: resize, plan, extract, encode, stitch, bank, project,
/// decode with injection. Writes one CSV per report section into out_dir
/// when non-empty. Every reported count is re-derived from the config at
/// emit time and mismatches throw.
RunReport run(const PipelineConfig& cfg, const std::string& out_dir = "");

struct ProbeRow {
    std::string label;          // inject-layer set, e.g. "2,4,6,8" or "none"
    std::vector<double> scores; // per seed
    double mean = 0.0;
    double stddev = 0.0;
    double mean_diff_vs_baseline = 0.0;
    int wins_vs_baseline = 0;
};

struct ProbeReport {
    int seeds = 0;
    std::vector<ProbeRow> rows; // rows[0] is the no-injection baseline
    std::string human() const;
    std::string csv() const;
};

/// Paired retention probe: per seed, decodes the same prepared inputs with
/// and without injection (plus an optional sweep of other layer sets) and
/// scores each trace by retention_score.
ProbeReport retention_probe(const PipelineConfig& cfg, int seeds,
                            const std::vector<std::vector<int>>& sweep = {});

void write_text_file(const std::string& path, const std::string& content);

} // namespace mosaic
