// SPDX-License-Identifier: Apache-2.0

// mosaic CLI: plan (geometry only), run (full pipeline), probe (retention
// sweep), synth (emit a test PPM). Exit codes: 0 success, 2 config error,
// 3 runtime error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mosaic/error.hpp"
#include "mosaic/pipeline.hpp"
#include "mosaic/strutil.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string profile = "toy";
    std::string out_dir;
    std::optional<long long> seed;
    std::optional<std::string> inject_layers;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "line-oriented key = value config file");
    cmd->add_option("--profile", args.profile, "base profile: toy or paper-geometry")
        ->check(CLI::IsMember({"toy", "paper-geometry"}));
    cmd->add_option("--out", args.out_dir, "output directory for report files");
    cmd->add_option("--seed", args.seed, "synthetic-input seed (probe: base seed)");
    cmd->add_option("--inject-layers", args.inject_layers,
                    "comma-separated decoder layers to inject into ('none' to disable)");
}

mosaic::PipelineConfig build_config(const CommonArgs& args) {
    mosaic::PipelineConfig cfg = args.profile == "paper-geometry"
                                     ? mosaic::PipelineConfig::paper_geometry()
                                     : mosaic::PipelineConfig::toy();
    if (!args.config_path.empty())
        cfg.load_file(args.config_path);
    if (args.seed)
        cfg.synth_seed = static_cast<uint64_t>(*args.seed);
    if (args.inject_layers)
        cfg.apply_kv("inject_layers", *args.inject_layers);
    return cfg;
}

void print_plan(const std::vector<mosaic::PlanRow>& rows) {
    std::printf("%-6s %-11s %-5s %-5s %-6s %-8s %-7s %-6s %s\n", "scale", "nominal_px", "t_s",
                "w_s", "tau_s", "delta_s", "n_side", "n_win", "n_tok");
    for (const auto& r : rows)
        std::printf("%-6d %-11g %-5d %-5d %-6d %-8d %-7d %-6lld %lld\n", r.scale_id, r.nominal_px,
                    r.token_width, r.window_px, r.token_stride, r.pixel_stride,
                    r.windows_per_side, r.window_count, r.token_count);
}

std::string plan_only_csv(const std::vector<mosaic::PlanRow>& rows) {
    mosaic::RunReport tmp;
    tmp.plan = rows;
    return tmp.plan_csv();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-scale window planning, Hann overlap-add stitching, and gated detail "
                 "injection pipeline"};
    app.require_subcommand(1);

    CommonArgs plan_args, run_args, probe_args, synth_args;

    CLI::App* plan_cmd = app.add_subcommand("plan", "compute and print the window geometry");
    add_common(plan_cmd, plan_args);

    CLI::App* run_cmd = app.add_subcommand("run", "execute the full pipeline");
    add_common(run_cmd, run_args);
    bool plan_only = false;
    run_cmd->add_flag("--plan-only", plan_only, "stop after geometry planning");

    CLI::App* probe_cmd = app.add_subcommand("probe", "paired retention probe across seeds");
    add_common(probe_cmd, probe_args);
    int probe_seeds = 20;
    probe_cmd->add_option("--seeds", probe_seeds, "number of paired seeds");

    CLI::App* synth_cmd = app.add_subcommand("synth", "emit a synthetic PPM image");
    add_common(synth_cmd, synth_args);
    std::string synth_out;
    int synth_side_arg = 0;
    synth_cmd->add_option("--out-file", synth_out, "output PPM path")->required();
    synth_cmd->add_option("--side", synth_side_arg, "image side in pixels (default canvas side)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) {
            const auto cfg = build_config(plan_args);
            const auto rows = mosaic::plan_rows(cfg);
            print_plan(rows);
            if (!plan_args.out_dir.empty()) {
                std::filesystem::create_directories(plan_args.out_dir);
                mosaic::write_text_file(plan_args.out_dir + "/plan.csv", plan_only_csv(rows));
            }
        } else if (run_cmd->parsed()) {
            const auto cfg = build_config(run_args);
            if (plan_only) {
                const auto rows = mosaic::plan_rows(cfg);
                print_plan(rows);
                if (!run_args.out_dir.empty()) {
                    std::filesystem::create_directories(run_args.out_dir);
                    mosaic::write_text_file(run_args.out_dir + "/plan.csv", plan_only_csv(rows));
                }
            } else {
                const auto report = mosaic::run(cfg, run_args.out_dir);
                std::fputs(report.human().c_str(), stdout);
            }
        } else if (probe_cmd->parsed()) {
            auto cfg = build_config(probe_args);
            // sweep mirrors the single-deep-layer ablation axis
            std::vector<std::vector<int>> sweep;
            if (!cfg.inject_layers.empty())
                sweep.push_back({*std::max_element(cfg.inject_layers.begin(),
                                                   cfg.inject_layers.end())});
            const auto report = mosaic::retention_probe(cfg, probe_seeds, sweep);
            std::fputs(report.human().c_str(), stdout);
            if (!probe_args.out_dir.empty()) {
                std::filesystem::create_directories(probe_args.out_dir);
                mosaic::write_text_file(probe_args.out_dir + "/probe.csv", report.csv());
            }
        } else if (synth_cmd->parsed()) {
            const auto cfg = build_config(synth_args);
            const int side = synth_side_arg > 0 ? synth_side_arg
                             : cfg.synth_side > 0 ? cfg.synth_side
                                                  : cfg.canvas_side;
            const auto img = mosaic::synth_image(cfg.synth_seed, side, cfg.patch_side);
            mosaic::write_ppm_file(img, synth_out);
            std::printf("wrote %dx%d ppm to %s\n", img.width, img.height, synth_out.c_str());
        }
    } catch (const mosaic::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
