// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
//
// streamsplat CLI: synthetic dataset generation, streaming reconstruction,
// stage-wise evaluation, benchmarking, and field rendering.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "streamsplat/dataset_io.hpp"
#include "streamsplat/eval.hpp"
#include "streamsplat/pipeline.hpp"
#include "streamsplat/ply_io.hpp"
#include "streamsplat/png_io.hpp"
#include "streamsplat/synthgen.hpp"

namespace ss = streamsplat;

namespace {

struct ToolConfig {
    ss::PipelineConfig pipeline;
    double opacity_filter_eps = 1e-4;
    double bg_distance = 0.02;
    double mask_threshold = 0.5;
};

void apply_json(ToolConfig& cfg, const nlohmann::json& j) {
    auto& p = cfg.pipeline;
    if (j.contains("feature_dim")) p.feature_dim = j["feature_dim"].get<int>();
    if (j.contains("patch_size")) p.patch_size = j["patch_size"].get<int>();
    if (j.contains("capacity_views")) p.capacity_views = j["capacity_views"].get<int>();
    if (j.contains("noise_deg")) p.noise_deg = j["noise_deg"].get<double>();
    if (j.contains("seed")) p.seed = j["seed"].get<uint64_t>();
    if (j.contains("latent_scale")) p.latent_scale = j["latent_scale"].get<double>();
    if (j.contains("use_direction_key")) p.use_direction_key = j["use_direction_key"].get<bool>();
    if (j.contains("src_opacity")) p.src_opacity = j["src_opacity"].get<double>();
    if (j.contains("mem_opacity")) p.mem_opacity = j["mem_opacity"].get<double>();
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        if (w.contains("lambda_g")) p.weights.lambda_g = w["lambda_g"].get<double>();
        if (w.contains("lambda_bg")) p.weights.lambda_bg = w["lambda_bg"].get<double>();
        if (w.contains("lambda_d")) p.weights.lambda_d = w["lambda_d"].get<double>();
        if (w.contains("alpha_bg")) p.weights.alpha_bg = w["alpha_bg"].get<double>();
    }
    if (j.contains("render")) {
        const auto& r = j["render"];
        if (r.contains("near")) p.render.near = r["near"].get<double>();
        if (r.contains("far")) p.render.far = r["far"].get<double>();
        if (r.contains("bg_color")) {
            const auto& c = r["bg_color"];
            p.render.bg_color = {c[0].get<float>(), c[1].get<float>(), c[2].get<float>()};
        }
        if (r.contains("alpha_cutoff")) p.render.alpha_cutoff = r["alpha_cutoff"].get<double>();
        if (r.contains("transmittance_floor"))
            p.render.transmittance_floor = r["transmittance_floor"].get<double>();
        if (r.contains("cov_lowpass")) p.render.cov_lowpass = r["cov_lowpass"].get<double>();
    }
    if (j.contains("opacity_filter_eps"))
        cfg.opacity_filter_eps = j["opacity_filter_eps"].get<double>();
    if (j.contains("bg_distance")) cfg.bg_distance = j["bg_distance"].get<double>();
    if (j.contains("mask_threshold")) cfg.mask_threshold = j["mask_threshold"].get<double>();
}

ToolConfig load_config(const std::string& path) {
    ToolConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw ss::ArgumentError("cannot open config " + path);
    nlohmann::json j;
    in >> j;
    apply_json(cfg, j);
    return cfg;
}

ss::LpipsTable load_lpips(const std::string& path) {
    ss::LpipsTable table;
    std::ifstream in(path);
    if (!in) throw ss::ArgumentError("cannot open lpips file " + path);
    nlohmann::json j;
    in >> j;
    for (const auto& row : j.at("values"))
        table[{row.at("t").get<int>(), row.at("view").get<int>()}] =
            row.at("lpips").get<double>();
    return table;
}

int cmd_generate(const std::string& out_dir, const std::string& kind, int count,
                 ss::TrajectoryParams params) {
    const ss::GaussianField object =
        ss::make_object(ss::object_kind_from_string(kind), params.seed, count);
    const auto trajectory = ss::sample_trajectory(params, {0.0, 0.0, 0.0});

    std::vector<ss::CameraPose> poses;
    poses.reserve(trajectory.size());
    for (const auto& [pose, k] : trajectory) poses.push_back(pose);
    poses = ss::normalize_pose_sequence(poses);

    std::vector<std::pair<ss::CameraPose, ss::CameraIntrinsics>> canonical;
    canonical.reserve(trajectory.size());
    for (size_t i = 0; i < trajectory.size(); ++i)
        canonical.emplace_back(poses[i], trajectory[i].second);

    // Rendering happens against the raw object in the original frame; the
    // normalized poses only re-express the same relative geometry, so the
    // object is re-expressed in reference-camera coordinates as well.
    ss::GaussianField canonical_object = object;
    const ss::CameraPose to_canonical = trajectory[0].first;
    for (auto& prim : canonical_object.primitives) {
        prim.mu = ss::Vec3f::from(to_canonical.apply(prim.mu.d()));
        // Isotropic primitives: rotation left unchanged.
    }

    ss::RenderSettings settings;
    settings.width = params.width;
    settings.height = params.height;
    const auto frames = ss::render_sequence(canonical_object, canonical, settings);

    ss::Dataset dataset;
    dataset.frames = frames;
    dataset.poses = poses;
    dataset.intrinsics = trajectory[0].second;
    ss::save_dataset(out_dir, dataset);
    ss::export_field(canonical_object, out_dir + "/object.ply");
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
}

int cmd_run(const std::string& dataset_dir, const std::string& out_dir, const ToolConfig& cfg) {
    const ss::Dataset dataset = ss::load_dataset(dataset_dir);
    if (dataset.frames.size() < 2) throw ss::ArgumentError("run: dataset too small");
    std::filesystem::create_directories(out_dir);

    ss::Pipeline pipeline(cfg.pipeline);
    std::ofstream diag(out_dir + "/diagnostics.jsonl");
    pipeline.init(dataset.frames[0], dataset.poses[0], dataset.intrinsics);
    for (size_t i = 1; i < dataset.frames.size(); ++i) {
        const auto result =
            pipeline.step_full(dataset.frames[i], dataset.poses[i], dataset.intrinsics);
        const auto losses = pipeline.step_losses(result.field, dataset.frames[i],
                                                 dataset.poses[i], dataset.intrinsics);
        char name[64];
        std::snprintf(name, sizeof(name), "/field_%05d.ply", result.diagnostics.t);
        ss::export_field(result.field, out_dir + name);

        nlohmann::json j;
        j["t"] = result.diagnostics.t;
        j["bank_tokens"] = result.diagnostics.bank_tokens;
        j["read_entropy_aligned"] = result.diagnostics.read_entropy_aligned;
        j["read_entropy_comp"] = result.diagnostics.read_entropy_comp;
        j["wall_ms"] = result.diagnostics.wall_ms;
        j["L_masked"] = losses.masked;
        j["L_bg"] = losses.bg;
        j["L_ray"] = losses.ray;
        j["L_depth"] = losses.depth;
        j["L_total"] = ss::total_loss(losses, cfg.pipeline.weights);
        diag << j.dump() << "\n";
    }
    std::cout << "ran " << dataset.frames.size() - 1 << " steps; fields and diagnostics in "
              << out_dir << "\n";
    return 0;
}

void print_stage(const char* name, const std::optional<ss::StageMetrics>& m) {
    if (!m) {
        std::printf("  %-6s (absent)\n", name);
        return;
    }
    std::printf("  %-6s psnr %7.3f  ssim %6.4f  ", name, m->psnr, m->ssim);
    if (m->lpips)
        std::printf("lpips %6.4f  ", *m->lpips);
    else
        std::printf("lpips    --   ");
    std::printf("m_avg %6.4f  (n=%d)\n", m->m_avg, m->count);
}

int cmd_eval(const std::string& dataset_dir, const std::string& out_json,
             const std::string& out_csv, const std::string& lpips_path, const ToolConfig& cfg) {
    const ss::Dataset dataset = ss::load_dataset(dataset_dir);
    ss::Pipeline pipeline(cfg.pipeline);
    ss::LpipsTable lpips;
    if (!lpips_path.empty()) lpips = load_lpips(lpips_path);

    const ss::StageReport report = ss::run_protocol(
        pipeline, dataset.frames, dataset.poses, dataset.per_frame_intrinsics(),
        cfg.pipeline.seed, cfg.pipeline.render, lpips.empty() ? nullptr : &lpips);

    if (!out_json.empty()) {
        std::ofstream out(out_json);
        out << report.to_json() << "\n";
    }
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        out << report.to_csv();
    }
    std::printf("stage-wise report (%zu rows)%s\n", report.rows.size(),
                report.lpips_present ? " with lpips" : "");
    print_stage("early", report.early);
    print_stage("mid", report.mid);
    print_stage("late", report.late);
    if (report.error) std::printf("  pipeline error: %s\n", report.error->c_str());
    return report.error ? 1 : 0;
}

int cmd_bench(const std::string& dataset_dir, const std::string& out_json, int repetitions,
              const ToolConfig& cfg) {
    const ss::Dataset dataset = ss::load_dataset(dataset_dir);
    const auto report = ss::bench(
        [&] { return std::make_unique<ss::Pipeline>(cfg.pipeline); }, dataset.frames,
        dataset.poses, dataset.per_frame_intrinsics(), repetitions);
    if (!out_json.empty()) {
        std::ofstream out(out_json);
        out << report.to_json() << "\n";
    }
    std::printf("bench: %d frames, median early %.3f ms, late %.3f ms, ratio %.3f\n",
                report.frame_count, report.median_early_ms, report.median_late_ms,
                report.late_early_ratio);
    return 0;
}

int cmd_render(const std::string& ply_path, const std::string& dataset_dir, int index,
               const std::string& out_png, const ToolConfig& cfg) {
    ss::GaussianField field = ss::import_field(ply_path);
    field = ss::filter_renderable(field, cfg.pipeline.render.bg_color, cfg.opacity_filter_eps,
                                  cfg.bg_distance);
    const ss::Dataset dataset = ss::load_dataset(dataset_dir);
    if (index < 0 || index >= static_cast<int>(dataset.poses.size()))
        throw ss::ArgumentError("render: frame index out of range");
    ss::RenderSettings settings = cfg.pipeline.render;
    settings.width = dataset.intrinsics.width;
    settings.height = dataset.intrinsics.height;
    const auto out = ss::render(field, dataset.poses[index], dataset.intrinsics, settings);
    ss::write_png_rgb(out_png, out.color);
    std::cout << "rendered " << field.size() << " primitives to " << out_png << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming gaussian-field object reconstruction"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();

    auto* generate = app.add_subcommand("generate", "render a synthetic dataset");
    std::string gen_out, gen_kind = "sphere";
    int gen_count = 2000;
    ss::TrajectoryParams params;
    generate->add_option("--out", gen_out, "output dataset directory")->required();
    generate->add_option("--kind", gen_kind, "sphere|box|torus|composite");
    generate->add_option("--count", gen_count, "primitive count");
    generate->add_option("--seed", params.seed, "trajectory/object seed");
    generate->add_option("--frames", params.frame_count, "camera count");
    generate->add_option("--waypoints", params.waypoints, "spline waypoints");
    generate->add_option("--k1-elevations", params.k1_elevations, "elevation keys");
    generate->add_option("--k2-radii", params.k2_radii, "radius keys");
    generate->add_option("--d-min", params.d_min, "shell inner radius");
    generate->add_option("--d-max", params.d_max, "shell outer radius");
    generate->add_option("--jitter", params.jitter, "look-at jitter, world units");
    generate->add_option("--width", params.width, "image width");
    generate->add_option("--height", params.height, "image height");

    auto* run = app.add_subcommand("run", "stream a dataset through the pipeline");
    std::string run_dataset, run_out;
    run->add_option("--dataset", run_dataset, "dataset directory")->required();
    run->add_option("--out", run_out, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "stage-wise NVS evaluation");
    std::string eval_dataset, eval_json, eval_csv, eval_lpips;
    eval_cmd->add_option("--dataset", eval_dataset, "dataset directory")->required();
    eval_cmd->add_option("--json", eval_json, "report JSON path");
    eval_cmd->add_option("--csv", eval_csv, "raw table CSV path");
    eval_cmd->add_option("--lpips", eval_lpips, "precomputed LPIPS JSON");

    auto* bench_cmd = app.add_subcommand("bench", "per-frame timing / memory report");
    std::string bench_dataset, bench_json;
    int bench_reps = 1;
    bench_cmd->add_option("--dataset", bench_dataset, "dataset directory")->required();
    bench_cmd->add_option("--json", bench_json, "report JSON path");
    bench_cmd->add_option("--repetitions", bench_reps, "timing repetitions");

    auto* render_cmd = app.add_subcommand("render", "render a PLY field at a dataset pose");
    std::string render_ply, render_dataset, render_out;
    int render_index = 0;
    render_cmd->add_option("--ply", render_ply, "gaussian field PLY")->required();
    render_cmd->add_option("--dataset", render_dataset, "dataset for pose/intrinsics")->required();
    render_cmd->add_option("--index", render_index, "frame index");
    render_cmd->add_option("--out", render_out, "output PNG")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const ToolConfig cfg = load_config(config_path);
        if (generate->parsed()) return cmd_generate(gen_out, gen_kind, gen_count, params);
        if (run->parsed()) return cmd_run(run_dataset, run_out, cfg);
        if (eval_cmd->parsed())
            return cmd_eval(eval_dataset, eval_json, eval_csv, eval_lpips, cfg);
        if (bench_cmd->parsed()) return cmd_bench(bench_dataset, bench_json, bench_reps, cfg);
        if (render_cmd->parsed())
            return cmd_render(render_ply, render_dataset, render_index, render_out, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
