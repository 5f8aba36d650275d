// SPDX-License-Identifier: Apache-2.0
#include "mosaic/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mosaic/error.hpp"
#include "mosaic/kernels.hpp"
#include "mosaic/strutil.hpp"

namespace mosaic {

PipelineConfig PipelineConfig::toy() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::paper_geometry() {
    PipelineConfig cfg;
    cfg.canvas_side = 672;
    cfg.patch_side = 14;
    cfg.min_token_width = 8;
    cfg.nominal_widths_px = {336.0, 168.0};
    cfg.encoder_side = 336;
    cfg.global_side = 336;
    cfg.feature_dim = 8;
    return cfg;
}

namespace {

long long parse_ll(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(strfmt("config: key '%s' needs an integer, got '%s'", key.c_str(),
                                 value.c_str()));
    }
}

double parse_d(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(strfmt("config: key '%s' needs a number, got '%s'", key.c_str(),
                                 value.c_str()));
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    if (trim(value) == "none")
        return out;
    for (const auto& part : split(value, ',')) {
        const std::string t = trim(part);
        if (t.empty())
            throw ConfigError(strfmt("config: key '%s' has an empty list element", key.c_str()));
        out.push_back(static_cast<int>(parse_ll(key, t)));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split(value, ',')) {
        const std::string t = trim(part);
        if (t.empty())
            throw ConfigError(strfmt("config: key '%s' has an empty list element", key.c_str()));
        out.push_back(parse_d(key, t));
    }
    return out;
}

} // namespace

void PipelineConfig::apply_kv(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "canvas_side")
        canvas_side = static_cast<int>(parse_ll(key, value));
    else if (key == "patch_side")
        patch_side = static_cast<int>(parse_ll(key, value));
    else if (key == "min_token_width")
        min_token_width = static_cast<int>(parse_ll(key, value));
    else if (key == "windows")
        nominal_widths_px = parse_double_list(key, value);
    else if (key == "encoder_seed")
        encoder_seed = static_cast<uint64_t>(parse_ll(key, value));
    else if (key == "feature_dim")
        feature_dim = static_cast<int>(parse_ll(key, value));
    else if (key == "layers")
        layer_ids = parse_int_list(key, value);
    else if (key == "encoder_side")
        encoder_side = static_cast<int>(parse_ll(key, value));
    else if (key == "global_side")
        global_side = static_cast<int>(parse_ll(key, value));
    else if (key == "downsample")
        downsample = static_cast<int>(parse_ll(key, value));
    else if (key == "stack_len")
        stack_len = value == "derive" ? 0 : static_cast<int>(parse_ll(key, value));
    else if (key == "llm_dim")
        llm_dim = static_cast<int>(parse_ll(key, value));
    else if (key == "decoder_layers")
        decoder_layers = static_cast<int>(parse_ll(key, value));
    else if (key == "inject_layers")
        inject_layers = parse_int_list(key, value);
    else if (key == "residual_scale")
        residual_scale = parse_d(key, value);
    else if (key == "fusion_seed")
        fusion_seed = static_cast<uint64_t>(parse_ll(key, value));
    else if (key == "text_tokens")
        text_tokens = static_cast<int>(parse_ll(key, value));
    else if (key == "input")
        input_path = value;
    else if (key == "synth_seed")
        synth_seed = static_cast<uint64_t>(parse_ll(key, value));
    else if (key == "synth_side")
        synth_side = static_cast<int>(parse_ll(key, value));
    else if (key == "dump_canvases")
        dump_canvases = parse_ll(key, value) != 0;
    else
        throw ConfigError(strfmt("config: unknown key '%s'", key.c_str()));
}

void PipelineConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError(strfmt("config: cannot open '%s'", path.c_str()));
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(strfmt("config: %s:%d: expected 'key = value'", path.c_str(), lineno));
        apply_kv(t.substr(0, eq), t.substr(eq + 1));
    }
}

void PipelineConfig::validate() const {
    const GridConfig grid = GridConfig::make(canvas_side, patch_side, min_token_width);
    if (nominal_widths_px.empty())
        throw ConfigError("config: need at least one nominal window width");
    std::vector<ScalePlan> plans;
    try {
        for (size_t i = 0; i < nominal_widths_px.size(); ++i)
            plans.push_back(plan_scale(grid, nominal_widths_px[i], static_cast<int>(i)));
        validate_cross_scale(plans, grid);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    if (encoder_side < patch_side || encoder_side % patch_side != 0)
        throw ConfigError(strfmt("config: encoder side %d not divisible by patch side %d",
                                 encoder_side, patch_side));
    const int enc_grid = encoder_side / patch_side;
    for (const auto& plan : plans) {
        if (enc_grid % plan.token_width != 0)
            throw ConfigError(strfmt(
                "config: scale %d: encoder grid side %d is not an integer multiple of the "
                "window token width %d",
                plan.scale_id, enc_grid, plan.token_width));
    }
    if (global_side < patch_side || global_side % patch_side != 0)
        throw ConfigError(strfmt("config: global side %d not divisible by patch side %d",
                                 global_side, patch_side));
    if (feature_dim < 1 || llm_dim < 1)
        throw ConfigError("config: feature_dim and llm_dim must be >= 1");
    if (layer_ids.empty())
        throw ConfigError("config: need at least one encoder layer id");
    for (int l : layer_ids)
        if (l < 1)
            throw ConfigError(strfmt("config: encoder layer id %d must be >= 1", l));
    if (downsample < 1)
        throw ConfigError(strfmt("config: downsample factor %d must be >= 1", downsample));
    if (stack_len < 0)
        throw ConfigError("config: stack_len must be 'derive' or a positive integer");
    if (stack_len > 0 && stack_len != global_token_count())
        throw ConfigError(strfmt(
            "config: explicit stack_len %d must equal the global token count %d "
            "(projection requires equal segment lengths)",
            stack_len, global_token_count()));
    if (decoder_layers < 1 || text_tokens < 1)
        throw ConfigError("config: decoder_layers and text_tokens must be >= 1");
    for (int l : inject_layers)
        if (l < 1 || l > decoder_layers)
            throw ConfigError(strfmt("config: inject layer %d outside [1, %d]", l, decoder_layers));
    if (!std::isfinite(residual_scale))
        throw ConfigError("config: residual_scale must be finite");
    if (input_path.empty()) {
        const int side = synth_side > 0 ? synth_side : canvas_side;
        if (side < patch_side)
            throw ConfigError(strfmt("config: synthetic image side %d below patch side %d",
                                     side, patch_side));
    }
}

Image synth_image(uint64_t seed, int side, int min_side) {
    if (min_side < 1)
        min_side = 1;
    if (side < min_side)
        throw ConfigError(strfmt("synth: side %d below the minimum %d", side, min_side));

    Image img;
    img.height = side;
    img.width = side;
    img.pixels.resize(static_cast<size_t>(side) * side * 3);

    const uint64_t base = splitmix64(seed ^ 0x73796e7468ULL);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            for (int c = 0; c < 3; ++c) {
                const uint64_t key = base ^ (static_cast<uint64_t>(y) * 0x9E3779B97F4A7C15ULL) ^
                                     (static_cast<uint64_t>(x) * 0xC2B2AE3D27D4EB4FULL) ^
                                     (static_cast<uint64_t>(c) + 1);
                img.pixels[(static_cast<size_t>(y) * side + x) * 3 + c] = hash_unit(key);
            }

    // three axis-aligned rectangles with pairwise distinct constant colors
    Rng rng(splitmix64(seed ^ 0x72656374ULL));
    std::vector<std::array<double, 3>> used;
    for (int k = 0; k < 3; ++k) {
        std::array<double, 3> color;
        do {
            for (int c = 0; c < 3; ++c)
                color[c] = rng.uniform_int(0, 4) / 4.0;
        } while (std::find(used.begin(), used.end(), color) != used.end());
        used.push_back(color);

        const int max_extent = std::max(1, side / 2);
        const int w = 1 + rng.uniform_int(0, max_extent - 1);
        const int h = 1 + rng.uniform_int(0, max_extent - 1);
        const int x0 = rng.uniform_int(0, std::max(0, side - w));
        const int y0 = rng.uniform_int(0, std::max(0, side - h));
        for (int y = y0; y < std::min(side, y0 + h); ++y)
            for (int x = x0; x < std::min(side, x0 + w); ++x) {
                double* px = img.at(y, x);
                px[0] = color[0];
                px[1] = color[1];
                px[2] = color[2];
            }
    }
    return img;
}

std::vector<PlanRow> plan_rows(const PipelineConfig& cfg) {
    cfg.validate();
    const GridConfig grid = GridConfig::make(cfg.canvas_side, cfg.patch_side, cfg.min_token_width);
    std::vector<PlanRow> rows;
    for (size_t i = 0; i < cfg.nominal_widths_px.size(); ++i) {
        const ScalePlan plan = plan_scale(grid, cfg.nominal_widths_px[i], static_cast<int>(i));
        PlanRow row;
        row.scale_id = plan.scale_id;
        row.nominal_px = plan.nominal_width_px;
        row.token_width = plan.token_width;
        row.window_px = plan.window_px;
        row.token_stride = plan.token_stride;
        row.pixel_stride = plan.pixel_stride;
        row.windows_per_side = plan.windows_per_side;
        row.window_count = static_cast<long long>(plan.windows_per_side) * plan.windows_per_side;
        row.token_count = mosaic::token_count(plan, grid);
        rows.push_back(row);
    }
    return rows;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

PipelineArtifacts prepare_timed(const PipelineConfig& cfg,
                                std::vector<std::pair<std::string, double>>* timings) {
    auto mark = [&](const char* stage, Clock::time_point t0) {
        if (timings)
            timings->emplace_back(stage, ms_since(t0));
    };

    auto t0 = Clock::now();
    cfg.validate();
    mark("validate", t0);

    PipelineArtifacts arts;
    t0 = Clock::now();
    Image source;
    try {
        source = cfg.input_path.empty()
                     ? synth_image(cfg.synth_seed,
                                   cfg.synth_side > 0 ? cfg.synth_side : cfg.canvas_side,
                                   cfg.patch_side)
                     : read_ppm_file(cfg.input_path);
    } catch (const Error& e) {
        throw Error(strfmt("input stage: %s", e.what()));
    }
    mark("input", t0);

    t0 = Clock::now();
    arts.canvas_img = resize_bilinear(source, cfg.canvas_side, cfg.canvas_side);
    mark("resize", t0);

    t0 = Clock::now();
    arts.grid = GridConfig::make(cfg.canvas_side, cfg.patch_side, cfg.min_token_width);
    for (size_t i = 0; i < cfg.nominal_widths_px.size(); ++i)
        arts.plans.push_back(plan_scale(arts.grid, cfg.nominal_widths_px[i], static_cast<int>(i)));
    validate_cross_scale(arts.plans, arts.grid);
    arts.backbone = BackboneParams::make(cfg.encoder_seed, cfg.feature_dim, cfg.patch_side,
                                         cfg.encoder_side, cfg.layer_ids);
    mark("plan", t0);

    t0 = Clock::now();
    for (const auto& plan : arts.plans) {
        std::map<int, std::vector<PatchFeatureGrid>> per_layer;
        for (const WindowRect& rect : enumerate_windows(plan)) {
            Image patch_img;
            try {
                patch_img = extract_patch(arts.canvas_img, rect);
            } catch (const Error& e) {
                throw Error(strfmt("extract stage: scale %d window (%d,%d): %s", plan.scale_id,
                                   rect.row, rect.col, e.what()));
            }
            auto grids = encode_patch(patch_img, arts.backbone);
            for (auto& [layer, grid] : grids) {
                grid.scale_id = plan.scale_id;
                grid.win_row = rect.row;
                grid.win_col = rect.col;
                per_layer[layer].push_back(pool_grid(grid, plan.token_width));
            }
        }
        for (auto& [layer, patches] : per_layer) {
            try {
                arts.canvases.emplace(std::make_pair(plan.scale_id, layer),
                                      overlap_add(patches, plan));
            } catch (const Error& e) {
                throw Error(strfmt("stitch stage: scale %d layer %d: %s", plan.scale_id, layer,
                                   e.what()));
            }
        }
    }
    mark("encode_stitch", t0);

    t0 = Clock::now();
    arts.global_tokens =
        encode_global(arts.canvas_img, arts.backbone, cfg.global_side, cfg.global_side);
    mark("global", t0);

    t0 = Clock::now();
    arts.bank = build_bank(arts.canvases, cfg.downsample, cfg.target_stack_len());
    mark("bank", t0);

    arts.fusion = FusionParams::make(cfg.fusion_seed, cfg.feature_dim, cfg.llm_dim,
                                     cfg.decoder_layers, cfg.text_tokens);
    for (auto& lp : arts.fusion.inject)
        lp.residual_scale = cfg.residual_scale;
    return arts;
}

void cross_check_report(const RunReport& report, const PipelineConfig& cfg) {
    const int tb = cfg.base_tokens();
    for (const auto& row : report.plan) {
        const long long t = row.token_width;
        if (row.windows_per_side != 2 * (tb / row.token_width) - 1 ||
            row.window_count !=
                static_cast<long long>(row.windows_per_side) * row.windows_per_side ||
            row.token_count != (2LL * tb - t) * (2LL * tb - t) ||
            row.token_count != row.window_count * t * t ||
            row.window_px != row.token_width * cfg.patch_side ||
            row.pixel_stride != row.token_stride * cfg.patch_side ||
            row.token_stride * 2 != row.token_width)
            throw Error(strfmt("report: plan row for scale %d fails formula re-derivation",
                               row.scale_id));
    }
    const int expected_stacks = static_cast<int>(cfg.nominal_widths_px.size()) *
                                static_cast<int>(cfg.layer_ids.size()) * cfg.downsample *
                                cfg.downsample;
    if (report.n_stack != expected_stacks)
        throw Error(strfmt("report: stack count %d != |S|*|L|*f^2 = %d", report.n_stack,
                           expected_stacks));
    if (report.stack_len != cfg.target_stack_len())
        throw Error("report: stack length disagrees with the T_v policy");
    for (size_t k = 0; k < report.stack_index.size(); ++k) {
        const int a = report.stack_index[k][2];
        const int b = report.stack_index[k][3];
        const int rows = (tb - a + cfg.downsample - 1) / cfg.downsample;
        const int cols = (tb - b + cfg.downsample - 1) / cfg.downsample;
        if (report.raw_lengths[k] != rows * cols)
            throw Error(strfmt("report: stack %zu raw length %d != congruence-class count %d", k,
                               report.raw_lengths[k], rows * cols));
    }
    if (static_cast<int>(report.trace.size()) != cfg.decoder_layers + 1)
        throw Error("report: trace row count != decoder depth + 1");
}

} // namespace

PipelineArtifacts prepare(const PipelineConfig& cfg) { return prepare_timed(cfg, nullptr); }

RunReport run(const PipelineConfig& cfg, const std::string& out_dir) {
    RunReport report;
    PipelineArtifacts arts = prepare_timed(cfg, &report.timings_ms);

    report.plan = plan_rows(cfg);
    report.n_stack = static_cast<int>(arts.bank.stacks.size());
    report.stack_len = arts.bank.stack_len;
    for (const auto& st : arts.bank.stacks) {
        report.raw_lengths.push_back(st.raw_length);
        report.stack_index.push_back({st.scale_id, st.layer_id, st.phase.a, st.phase.b});
    }

    auto t0 = Clock::now();
    const std::set<int> inject(cfg.inject_layers.begin(), cfg.inject_layers.end());
    DecoderTrace trace;
    try {
        trace = decoder_forward(arts.global_tokens, cfg.feature_dim, arts.fusion.text_embed,
                                arts.bank, arts.fusion,
                                inject, inject);
    } catch (const Error& e) {
        throw Error(strfmt("decode stage: %s", e.what()));
    }
    report.timings_ms.emplace_back("decode", ms_since(t0));

    const auto& ops = kernels::active();
    for (const auto& lt : trace.layers) {
        TraceRow row;
        row.layer = lt.layer;
        const auto vis = lt.h.vis();
        row.vis_l2 = std::sqrt(ops.dot(vis.data(), vis.data(), vis.size()));
        row.injected = lt.injected;
        row.delta_l2 = lt.delta_l2;
        row.alpha = lt.alpha;
        report.trace.push_back(std::move(row));
    }
    if (!inject.empty()) {
        const auto final_vis = trace.layers.back().h.vis();
        double sum = 0.0;
        int n = 0;
        for (const auto& lt : trace.layers) {
            if (!lt.fused)
                continue;
            const double c = cosine_similarity(final_vis, lt.fused_detail);
            report.retention.emplace_back(lt.layer, c);
            sum += c;
            ++n;
        }
        report.retention_mean = n > 0 ? sum / n : 0.0;
    }

    cross_check_report(report, cfg);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir + "/plan.csv", report.plan_csv());
        write_text_file(out_dir + "/bank.csv", report.bank_csv());
        write_text_file(out_dir + "/trace.csv", report.trace_csv());
        write_text_file(out_dir + "/retention.csv", report.retention_csv());
        write_text_file(out_dir + "/timings.csv", report.timings_csv());
        if (cfg.dump_canvases) {
            for (const auto& [key, canvas] : arts.canvases) {
                std::ofstream f(strfmt("%s/canvas_s%d_l%d.bin", out_dir.c_str(), key.first,
                                       key.second),
                                std::ios::binary);
                dump_canvas(canvas, f);
            }
            std::ofstream f(out_dir + "/bank.bin", std::ios::binary);
            dump_bank(arts.bank, f);
        }
    }
    return report;
}

ProbeReport retention_probe(const PipelineConfig& cfg, int seeds,
                            const std::vector<std::vector<int>>& sweep) {
    if (seeds < 2)
        throw Error(strfmt("probe: need at least 2 seeds, got %d", seeds));

    std::set<int> record(cfg.inject_layers.begin(), cfg.inject_layers.end());
    if (record.empty()) {
        for (int l : {2, 4, 6, 8})
            if (l <= cfg.decoder_layers)
                record.insert(l);
        if (record.empty())
            record.insert(cfg.decoder_layers);
    }

    auto label_of = [](const std::vector<int>& layers) {
        if (layers.empty())
            return std::string("none");
        std::string s;
        for (size_t i = 0; i < layers.size(); ++i)
            s += (i ? "+" : "") + std::to_string(layers[i]);
        return s;
    };

    std::vector<std::vector<int>> arms;
    arms.push_back({}); // baseline
    std::vector<int> main_arm(record.begin(), record.end());
    arms.push_back(main_arm);
    for (const auto& extra : sweep) {
        std::vector<int> sorted = extra;
        std::sort(sorted.begin(), sorted.end());
        if (std::find(arms.begin(), arms.end(), sorted) == arms.end())
            arms.push_back(sorted);
    }

    ProbeReport report;
    report.seeds = seeds;
    for (const auto& arm : arms) {
        ProbeRow row;
        row.label = label_of(arm);
        report.rows.push_back(std::move(row));
    }

    for (int k = 0; k < seeds; ++k) {
        PipelineConfig cfg_k = cfg;
        cfg_k.synth_seed = cfg.synth_seed + static_cast<uint64_t>(k);
        cfg_k.encoder_seed = cfg.encoder_seed + static_cast<uint64_t>(k);
        cfg_k.fusion_seed = cfg.fusion_seed + static_cast<uint64_t>(k);
        const PipelineArtifacts arts = prepare(cfg_k);
        for (size_t a = 0; a < arms.size(); ++a) {
            const std::set<int> inject(arms[a].begin(), arms[a].end());
            const DecoderTrace trace =
                decoder_forward(arts.global_tokens, cfg.feature_dim, arts.fusion.text_embed,
                                arts.bank, arts.fusion, inject, record);
            report.rows[a].scores.push_back(retention_score(trace));
        }
    }

    const auto& base = report.rows[0].scores;
    for (auto& row : report.rows) {
        double sum = 0.0;
        for (double s : row.scores)
            sum += s;
        row.mean = sum / seeds;
        double sq = 0.0;
        for (double s : row.scores)
            sq += (s - row.mean) * (s - row.mean);
        row.stddev = seeds > 1 ? std::sqrt(sq / (seeds - 1)) : 0.0;
        row.mean_diff_vs_baseline = row.mean - report.rows[0].mean;
        row.wins_vs_baseline = 0;
        for (int k = 0; k < seeds; ++k)
            if (row.scores[k] > base[k])
                row.wins_vs_baseline++;
    }
    return report;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(strfmt("cannot open '%s' for writing", path.c_str()));
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string RunReport::plan_csv() const {
    std::string s = "scale,nominal_px,t_s,w_s,tau_s,delta_s,n_side,n_win,n_tok\n";
    for (const auto& r : plan)
        s += strfmt("%d,%s,%d,%d,%d,%d,%d,%lld,%lld\n", r.scale_id,
                    fmt_double(r.nominal_px).c_str(), r.token_width, r.window_px, r.token_stride,
                    r.pixel_stride, r.windows_per_side, r.window_count, r.token_count);
    return s;
}

std::string RunReport::bank_csv() const {
    std::string s = "n_stack,stack_len\n";
    s += strfmt("%d,%d\n", n_stack, stack_len);
    s += "stack,scale,layer,a,b,raw_length\n";
    for (size_t k = 0; k < stack_index.size(); ++k)
        s += strfmt("%zu,%d,%d,%d,%d,%d\n", k, stack_index[k][0], stack_index[k][1],
                    stack_index[k][2], stack_index[k][3], raw_lengths[k]);
    return s;
}

std::string RunReport::trace_csv() const {
    std::string s = "layer,vis_l2,delta_l2";
    size_t n_alpha = 0;
    for (const auto& r : trace)
        n_alpha = std::max(n_alpha, r.alpha.size());
    for (size_t i = 0; i < n_alpha; ++i)
        s += strfmt(",alpha%zu", i);
    s += "\n";
    for (const auto& r : trace) {
        s += strfmt("%d,%s", r.layer, fmt_double(r.vis_l2).c_str());
        s += r.injected ? strfmt(",%s", fmt_double(r.delta_l2).c_str()) : ",";
        for (double a : r.alpha)
            s += strfmt(",%s", fmt_double(a).c_str());
        s += "\n";
    }
    return s;
}

std::string RunReport::retention_csv() const {
    std::string s = "layer,cosine_to_fused\n";
    for (const auto& [layer, c] : retention)
        s += strfmt("%d,%s\n", layer, fmt_double(c).c_str());
    if (!retention.empty())
        s += strfmt("mean,%s\n", fmt_double(retention_mean).c_str());
    return s;
}

std::string RunReport::timings_csv() const {
    std::string s = "stage,ms\n";
    for (const auto& [stage, ms] : timings_ms)
        s += strfmt("%s,%.3f\n", stage.c_str(), ms);
    return s;
}

std::string RunReport::human() const {
    std::string s;
    s += "plan\n";
    s += strfmt("  %-6s %-11s %-5s %-5s %-6s %-8s %-7s %-6s %s\n", "scale", "nominal_px", "t_s",
                "w_s", "tau_s", "delta_s", "n_side", "n_win", "n_tok");
    for (const auto& r : plan)
        s += strfmt("  %-6d %-11g %-5d %-5d %-6d %-8d %-7d %-6lld %lld\n", r.scale_id,
                    r.nominal_px, r.token_width, r.window_px, r.token_stride, r.pixel_stride,
                    r.windows_per_side, r.window_count, r.token_count);
    if (n_stack > 0) {
        s += strfmt("bank\n  n_stack=%d stack_len=%d raw_lengths=", n_stack, stack_len);
        for (size_t k = 0; k < raw_lengths.size(); ++k)
            s += strfmt("%s%d", k ? "," : "", raw_lengths[k]);
        s += "\n";
    }
    if (!trace.empty()) {
        s += "trace\n";
        s += strfmt("  %-6s %-22s %-22s %s\n", "layer", "vis_l2", "delta_l2", "alpha");
        for (const auto& r : trace) {
            s += strfmt("  %-6d %-22.15g ", r.layer, r.vis_l2);
            s += r.injected ? strfmt("%-22.15g ", r.delta_l2) : strfmt("%-22s ", "-");
            if (!r.alpha.empty()) {
                for (size_t i = 0; i < r.alpha.size(); ++i)
                    s += strfmt("%s%.6f", i ? "," : "", r.alpha[i]);
            } else {
                s += "-";
            }
            s += "\n";
        }
    }
    if (!retention.empty()) {
        s += "retention\n";
        for (const auto& [layer, c] : retention)
            s += strfmt("  layer %d: cosine %.15g\n", layer, c);
        s += strfmt("  mean: %.15g\n", retention_mean);
    }
    if (!timings_ms.empty()) {
        s += "timings\n";
        for (const auto& [stage, ms] : timings_ms)
            s += strfmt("  %-14s %10.3f ms\n", stage.c_str(), ms);
    }
    return s;
}

std::string ProbeReport::human() const {
    std::string s = strfmt("retention probe over %d seeds (baseline: no injection)\n", seeds);
    s += strfmt("  %-12s %-12s %-12s %-14s %s\n", "layers", "mean", "stddev", "diff_vs_base",
                "wins");
    for (const auto& r : rows)
        s += strfmt("  %-12s %-12.6f %-12.6f %-14.6f %d/%d\n", r.label.c_str(), r.mean, r.stddev,
                    r.mean_diff_vs_baseline, r.wins_vs_baseline, seeds);
    return s;
}

std::string ProbeReport::csv() const {
    std::string s = "label,mean,stddev,mean_diff_vs_baseline,wins,seeds";
    for (int k = 0; k < seeds; ++k)
        s += strfmt(",score%d", k);
    s += "\n";
    for (const auto& r : rows) {
        s += strfmt("%s,%s,%s,%s,%d,%d", r.label.c_str(), fmt_double(r.mean).c_str(),
                    fmt_double(r.stddev).c_str(), fmt_double(r.mean_diff_vs_baseline).c_str(),
                    r.wins_vs_baseline, seeds);
        for (double v : r.scores)
            s += strfmt(",%s", fmt_double(v).c_str());
        s += "\n";
    }
    return s;
}

} // namespace mosaic
