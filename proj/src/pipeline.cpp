// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "streamsplat/errors.hpp"
#include "streamsplat/random.hpp"

namespace streamsplat {

namespace {

// Per-pixel back-projection of one frame; off-mask pixels become zero-opacity
// padding on their camera ray so the N-count stays exact.
GaussianField back_project_frame(const FrameObservation& frame, const CameraPose& pose,
                                 const CameraIntrinsics& k, double opacity, double scale_px,
                                 Subgroup tag) {
    if (!frame.depth) throw UnsupportedInputError("fusion requires oracle depth");
    const int h = frame.rgb.height, w = frame.rgb.width;
    const Mat3 rot_t = transpose(pose.rotation);

    double depth_sum = 0.0;
    size_t depth_count = 0;
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col)
            if (frame.mask.at(row, col)) {
                depth_sum += frame.depth->at(row, col);
                ++depth_count;
            }
    const double pad_depth = depth_count > 0 ? depth_sum / depth_count : 1.0;

    GaussianField field;
    field.primitives.reserve(static_cast<size_t>(h) * w);
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col) {
            const bool on_mask = frame.mask.at(row, col) != 0;
            const double d = on_mask ? frame.depth->at(row, col) : pad_depth;
            const Vec3 cam{(col + 0.5 - k.cx) / k.fx * d, (row + 0.5 - k.cy) / k.fy * d, d};
            const Vec3 world = rot_t * (cam - pose.translation);
            if (on_mask) {
                const double sc = std::max(scale_px * d / k.fx, 1e-4);
                field.push_back(GaussianPrimitive::make(world, Quatf{}, {sc, sc, sc},
                                                        frame.rgb.rgb(row, col).d(), opacity),
                                tag);
            } else {
                field.push_back(GaussianPrimitive::make(world, Quatf{}, {1e-3, 1e-3, 1e-3},
                                                        {0.0, 0.0, 0.0}, 0.0),
                                tag);
            }
        }
    return field;
}

void expand_summaries(GaussianField& field, const std::vector<PatchSummary>& summaries,
                      int per_patch, const CameraIntrinsics& k, int patch_size,
                      double mem_opacity, uint64_t seed) {
    Rng rng(seed);
    for (const auto& summary : summaries) {
        const double coverage = std::min(1.0, std::max(0.0, summary.coverage));
        const double depth = std::max(summary.mean_depth, 1e-3);
        // Footprint of the source patch at its depth bounds the blob.
        const double radius = std::max(0.5 * patch_size * depth / k.fx, 1e-3);
        const double sc = std::max(0.35 * radius, 1e-4);
        const double opacity = coverage > 0.01 ? mem_opacity * coverage : 0.0;
        for (int i = 0; i < per_patch; ++i) {
            Vec3 offset;
            do {
                offset = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                          rng.uniform(-1.0, 1.0)};
            } while (dot(offset, offset) > 1.0);
            field.push_back(GaussianPrimitive::make(summary.centroid + radius * offset, Quatf{},
                                                    {sc, sc, sc}, summary.color, opacity),
                            Subgroup::mem);
        }
    }
}

}  // namespace

GaussianField baseline_fusion(const FusionInputs& in) {
    if (!in.ref_frame || !in.src_frame || !in.readout)
        throw ArgumentError("baseline_fusion: missing inputs");
    const int n_pixels = in.src_frame->rgb.height * in.src_frame->rgb.width;
    const int p_count = static_cast<int>(in.aligned_summaries.size());
    if (p_count == 0 || n_pixels % p_count != 0)
        throw ArgumentError("baseline_fusion: pixel count not divisible by patch count");
    const int per_patch = n_pixels / p_count;

    GaussianField field;
    field.primitives.reserve(static_cast<size_t>(4) * n_pixels);
    expand_summaries(field, in.aligned_summaries, per_patch, in.src_intrinsics, in.patch_size,
                     in.mem_opacity, mix_seed(in.seed, in.t * 2ULL));
    expand_summaries(field, in.comp_summaries, per_patch, in.src_intrinsics, in.patch_size,
                     in.mem_opacity, mix_seed(in.seed, in.t * 2ULL + 1));
    field.append(back_project_frame(*in.ref_frame, in.ref_pose, in.ref_intrinsics,
                                    in.src_opacity, in.src_scale, Subgroup::ref));
    field.append(back_project_frame(*in.src_frame, in.src_pose, in.src_intrinsics,
                                    in.src_opacity, in.src_scale, Subgroup::src));
    return field;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), fusion_(baseline_fusion) {
    if (config_.feature_dim < kMinFeatureDim) throw ArgumentError("pipeline: feature_dim too small");
    if (config_.capacity_views < 1) throw ArgumentError("pipeline: capacity_views must be >= 1");
}

int Pipeline::tokens_per_view(const CameraIntrinsics& k) const {
    if (k.height % config_.patch_size != 0 || k.width % config_.patch_size != 0)
        throw ArgumentError("pipeline: image size not divisible by patch size");
    const int p = (k.height / config_.patch_size) * (k.width / config_.patch_size);
    if ((k.height * k.width) % p != 0)
        throw ArgumentError("pipeline: pixel count not divisible by token count");
    return p;
}

void Pipeline::init(const FrameObservation& reference, const CameraPose& pose,
                    const CameraIntrinsics& intrinsics) {
    if (reference.mask.count() == 0) throw PipelineError("init: reference mask is empty");
    const int p = tokens_per_view(intrinsics);

    // Canonical coordinates are the reference camera's; the stored reference
    // pose is the identity regardless of the absolute pose handed in.
    const CameraPose canonical = CameraPose::identity();
    (void)pose;

    auto bank = std::make_unique<MemoryBank>(config_.feature_dim, p,
                                             config_.capacity_views * p);
    const DirectionEstimate est =
        direction_oracle(canonical, config_.noise_deg, mix_seed(config_.seed, 0));
    const Vec3 dir_key = direction_key_from_angles(est.theta, est.phi);
    const MatX keys =
        latent_key_stub(reference, config_.patch_size, config_.feature_dim, config_.latent_scale);
    ValueEncoding enc = value_stub(reference, canonical, intrinsics, config_.patch_size,
                                   config_.feature_dim);
    bank->write(keys, dir_key, enc.values, 0);

    bank_ = std::move(bank);
    ref_frame_ = reference;
    ref_pose_ = canonical;
    ref_intrinsics_ = intrinsics;
    ref_direction_ = dir_key;
    t_ = 0;
    initialized_ = true;
}

namespace {

double mean_row_entropy(const MatX& attention) {
    double total = 0.0;
    for (int p = 0; p < attention.rows; ++p) {
        const double* row = attention.row_ptr(p);
        double h = 0.0;
        for (int i = 0; i < attention.cols; ++i)
            if (row[i] > 0.0) h -= row[i] * std::log(row[i]);
        total += h;
    }
    return attention.rows > 0 ? total / attention.rows : 0.0;
}

}  // namespace

StepResult Pipeline::step_full(const FrameObservation& frame, const CameraPose& pose,
                               const CameraIntrinsics& intrinsics) {
    if (!initialized_) throw PipelineError("step before init");
    if (frame.mask.count() == 0) throw PipelineError("step: frame mask is empty");
    const auto t0 = std::chrono::steady_clock::now();
    const int next_t = t_ + 1;

    // Fallible phase: nothing below mutates pipeline state.
    const MatX keys =
        latent_key_stub(frame, config_.patch_size, config_.feature_dim, config_.latent_scale);
    const DirectionEstimate est =
        direction_oracle(pose, config_.noise_deg, mix_seed(config_.seed, next_t));
    const Vec3 dir_key = direction_key_from_angles(est.theta, est.phi);
    const ScoreMode mode =
        config_.use_direction_key ? ScoreMode::dual : ScoreMode::latent_only;
    ReadoutResult readout =
        bank_->read_detached(keys, ref_direction_, dir_key, est.sigma, mode);

    FusionInputs inputs;
    inputs.ref_frame = &ref_frame_;
    inputs.ref_pose = ref_pose_;
    inputs.ref_intrinsics = ref_intrinsics_;
    inputs.src_frame = &frame;
    inputs.src_pose = pose;
    inputs.src_intrinsics = intrinsics;
    inputs.readout = &readout;
    inputs.t = next_t;
    inputs.seed = config_.seed;
    inputs.patch_size = config_.patch_size;
    inputs.src_opacity = config_.src_opacity;
    inputs.src_scale = config_.src_scale;
    inputs.mem_opacity = config_.mem_opacity;
    inputs.aligned_summaries.reserve(readout.aligned.rows);
    inputs.comp_summaries.reserve(readout.complementary.rows);
    for (int p = 0; p < readout.aligned.rows; ++p) {
        inputs.aligned_summaries.push_back(
            decode_value_summary(readout.aligned.row_ptr(p), config_.feature_dim));
        inputs.comp_summaries.push_back(
            decode_value_summary(readout.complementary.row_ptr(p), config_.feature_dim));
    }

    GaussianField field = fusion_(inputs);
    const size_t n_pixels = frame.rgb.pixel_count();
    if (field.size() != 4 * n_pixels || field.count(Subgroup::mem) != 2 * n_pixels ||
        field.count(Subgroup::ref) != n_pixels || field.count(Subgroup::src) != n_pixels)
        throw PipelineError("step: fusion violated the 2N/N/N output split");

    ValueEncoding enc =
        value_stub(frame, pose, intrinsics, config_.patch_size, config_.feature_dim);

    // Commit phase.
    bank_->accumulate_usage(readout);
    bank_->write(keys, dir_key, enc.values, next_t);
    t_ = next_t;

    StepResult result;
    result.field = std::move(field);
    result.diagnostics.t = t_;
    result.diagnostics.bank_tokens = static_cast<int>(bank_->size());
    result.diagnostics.read_entropy_aligned = mean_row_entropy(readout.attention_aligned);
    result.diagnostics.read_entropy_comp = mean_row_entropy(readout.attention_comp);
    result.diagnostics.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

LossParts Pipeline::step_losses(const GaussianField& field, const FrameObservation& frame,
                                const CameraPose& pose, const CameraIntrinsics& intrinsics) const {
    RenderSettings rs = config_.render;
    rs.width = intrinsics.width;
    rs.height = intrinsics.height;
    const RenderOutput out = render(field, pose, intrinsics, rs);

    LossParts parts;
    parts.masked = masked_mse(out.color, frame.rgb, frame.mask);
    parts.bg = bg_penalty(field, ref_frame_.mask, ref_pose_, frame.mask, pose, intrinsics,
                          config_.weights.alpha_bg);

    // Ray loss over the masked source-subgroup primitives, pixel-aligned.
    std::vector<GaussianPrimitive> subset;
    std::vector<PixelAssign> assignment;
    const int w = frame.rgb.width;
    size_t pixel = 0;
    for (size_t i = 0; i < field.size(); ++i) {
        if (field.subgroup[i] != Subgroup::src) continue;
        const int row = static_cast<int>(pixel) / w;
        const int col = static_cast<int>(pixel) % w;
        ++pixel;
        if (!frame.mask.at(row, col)) continue;
        subset.push_back(field.primitives[i]);
        assignment.push_back({col, row});
    }
    if (!subset.empty()) parts.ray = ray_alignment(subset, pose, intrinsics, assignment);

    if (frame.depth) parts.depth = normalized_depth(out.depth, *frame.depth, frame.mask);
    return parts;
}

std::string BenchReport::to_json() const {
    nlohmann::json j;
    j["frame_count"] = frame_count;
    j["repetitions"] = repetitions;
    j["median_early_ms"] = median_early_ms;
    j["median_late_ms"] = median_late_ms;
    j["late_early_ratio"] = late_early_ratio;
    j["per_frame_ms"] = per_frame_ms;
    j["bank_tokens"] = bank_tokens;
    return j.dump(2);
}

namespace {

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

BenchReport bench(const std::function<std::unique_ptr<Pipeline>()>& factory,
                  const std::vector<FrameObservation>& frames,
                  const std::vector<CameraPose>& poses,
                  const std::vector<CameraIntrinsics>& intrinsics, int repetitions) {
    const int n = static_cast<int>(frames.size());
    if (n < 50) throw ArgumentError("bench: need at least 50 frames");
    if (poses.size() != frames.size() || intrinsics.size() != frames.size())
        throw ArgumentError("bench: frames/poses size mismatch");
    if (repetitions < 1) throw ArgumentError("bench: repetitions must be >= 1");

    BenchReport report;
    report.frame_count = n;
    report.repetitions = repetitions;
    report.per_frame_ms.assign(n, 1e300);
    report.bank_tokens.assign(n, 0);

    for (int rep = 0; rep < repetitions; ++rep) {
        auto pipeline = factory();
        for (int i = 0; i < n; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            if (i == 0) {
                pipeline->init(frames[0], poses[0], intrinsics[0]);
            } else {
                (void)pipeline->step_full(frames[i], poses[i], intrinsics[i]);
            }
            const double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
            report.per_frame_ms[i] = std::min(report.per_frame_ms[i], ms);
            report.bank_tokens[i] = static_cast<int>(pipeline->bank().size());
        }
    }

    const auto window_median = [&](int lo, int hi) {
        std::vector<double> vals;
        for (int i = std::max(0, lo); i <= std::min(n - 1, hi); ++i)
            vals.push_back(report.per_frame_ms[i]);
        return median_of(vals);
    };
    report.median_early_ms = window_median(10, 30);
    if (n >= 201) {
        report.median_late_ms = window_median(170, 200);
    } else {
        report.median_late_ms = window_median(n - 31, n - 1);
    }
    report.late_early_ratio =
        report.median_early_ms > 0.0 ? report.median_late_ms / report.median_early_ms : 0.0;
    return report;
}

}  // namespace streamsplat
