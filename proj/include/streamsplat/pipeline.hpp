// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "streamsplat/encoders.hpp"
#include "streamsplat/eval.hpp"
#include "streamsplat/losses.hpp"
#include "streamsplat/memory_bank.hpp"
#include "streamsplat/rasterizer.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

struct PipelineConfig {
    int feature_dim = 64;      // C
    int patch_size = 8;        // P = (H/patch)*(W/patch)
    int capacity_views = 20;   // S; bank capacity = S * P
    double noise_deg = 0.0;    // direction oracle error bound
    uint64_t seed = 1;
    double latent_scale = 2.5;
    bool use_direction_key = true;  // false: directional factors replaced by 1
    double src_opacity = 0.95;
    double src_scale = 0.3;   // impostor footprint, pixels of source footprint
    double mem_opacity = 0.65;
    LossWeights weights;
    RenderSettings render;
};

// Everything the fusion stage consumes; the baseline is a pure function of
// these inputs.
struct FusionInputs {
    const FrameObservation* ref_frame = nullptr;
    CameraPose ref_pose;
    CameraIntrinsics ref_intrinsics;
    const FrameObservation* src_frame = nullptr;
    CameraPose src_pose;
    CameraIntrinsics src_intrinsics;
    const ReadoutResult* readout = nullptr;
    std::vector<PatchSummary> aligned_summaries;
    std::vector<PatchSummary> comp_summaries;
    int t = 0;
    uint64_t seed = 0;
    int patch_size = 8;
    double src_opacity = 0.95;
    double src_scale = 0.3;
    double mem_opacity = 0.65;
};

using FusionFn = std::function<GaussianField(const FusionInputs&)>;

// Depth-oracle fusion: source and reference subgroups from per-pixel
// back-projection (zero-opacity padding off the mask), memory subgroup from
// the two readouts (each patch summary expands to N/P primitives around its
// centroid). Output split is exactly (2N, N, N).
GaussianField baseline_fusion(const FusionInputs& inputs);

struct StepDiagnostics {
    int t = 0;
    int bank_tokens = 0;
    double read_entropy_aligned = 0.0;  // mean attention entropy over query rows
    double read_entropy_comp = 0.0;
    double wall_ms = 0.0;
};

struct StepResult {
    GaussianField field;
    StepDiagnostics diagnostics;
};

class Pipeline : public StreamReconstructor {
public:
    explicit Pipeline(PipelineConfig config);

    // Anchors the canonical frame to the reference camera, encodes and writes
    // the reference tokens (t = 0, no read). Re-init discards prior state.
    void init(const FrameObservation& reference, const CameraPose& pose,
              const CameraIntrinsics& intrinsics) override;

    // One causal update: encode, dual read, fuse, write back. Transactional -
    // a throwing step leaves bank and t unchanged.
    StepResult step_full(const FrameObservation& frame, const CameraPose& pose,
                         const CameraIntrinsics& intrinsics);

    GaussianField step(const FrameObservation& frame, const CameraPose& pose,
                       const CameraIntrinsics& intrinsics) override {
        return step_full(frame, pose, intrinsics).field;
    }

    const MemoryBank& bank() const { return *bank_; }
    const PipelineConfig& config() const { return config_; }
    int t() const { return t_; }
    bool initialized() const { return initialized_; }
    Vec3 reference_direction() const { return ref_direction_; }

    void set_fusion(FusionFn fusion) { fusion_ = std::move(fusion); }

    // Loss breakdown of a produced field against the current frame (and the
    // stored reference), for diagnostics logging.
    LossParts step_losses(const GaussianField& field, const FrameObservation& frame,
                          const CameraPose& pose, const CameraIntrinsics& intrinsics) const;

private:
    PipelineConfig config_;
    FusionFn fusion_;
    std::unique_ptr<MemoryBank> bank_;
    bool initialized_ = false;
    int t_ = 0;
    FrameObservation ref_frame_;
    CameraPose ref_pose_;
    CameraIntrinsics ref_intrinsics_;
    Vec3 ref_direction_{0.0, 0.0, 1.0};

    int tokens_per_view(const CameraIntrinsics& intrinsics) const;
};

struct BenchReport {
    std::vector<double> per_frame_ms;  // fastest repetition per frame
    std::vector<int> bank_tokens;
    double median_early_ms = 0.0;  // frames 10..30
    double median_late_ms = 0.0;   // frames 170..200 (tail window when shorter)
    double late_early_ratio = 0.0;
    int frame_count = 0;
    int repetitions = 0;

    std::string to_json() const;
};

// Streams the sequence through fresh pipelines `repetitions` times and
// reports per-frame wall time and bank occupancy.
BenchReport bench(const std::function<std::unique_ptr<Pipeline>()>& factory,
                  const std::vector<FrameObservation>& frames,
                  const std::vector<CameraPose>& poses,
                  const std::vector<CameraIntrinsics>& intrinsics, int repetitions);

}  // namespace streamsplat
