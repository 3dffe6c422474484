// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamsplat/rasterizer.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

// 10 log10(peak^2 / MSE) with peak 1.0; identical images hit the 99 dB
// sentinel.
double psnr(const Image& a, const Image& b);
constexpr double kPsnrSentinel = 99.0;

// Mean local SSIM over valid 11x11 window positions (Gaussian window,
// sigma 1.5, K1 = 0.01, K2 = 0.03, per-channel mean).
double ssim(const Image& a, const Image& b);

// Normalized metric average; without LPIPS the mean runs over two terms.
double m_avg(double psnr_db, double ssim_value);
double m_avg(double psnr_db, double ssim_value, double lpips_value);

// Deterministic split into ceil(n/2) input frames and the rest as targets,
// both sorted.
std::pair<std::vector<int>, std::vector<int>> split_input_target(int frame_count, uint64_t seed);

// Causal reconstructor interface the evaluation protocol drives.
class StreamReconstructor {
public:
    virtual ~StreamReconstructor() = default;
    virtual void init(const FrameObservation& reference, const CameraPose& pose,
                      const CameraIntrinsics& intrinsics) = 0;
    virtual GaussianField step(const FrameObservation& frame, const CameraPose& pose,
                               const CameraIntrinsics& intrinsics) = 0;
};

struct EvalRow {
    int t = 0;
    int view = 0;  // target frame id
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> lpips;
};

struct StageMetrics {
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> lpips;
    double m_avg = 0.0;
    int count = 0;  // (t, view) pairs aggregated
};

// Stage sets over evaluated timesteps: early {1..4}, mid {5..10}, late
// {11..T}; a stage absent from the run stays unset.
struct StageReport {
    std::vector<EvalRow> rows;
    std::optional<StageMetrics> early, mid, late;
    bool lpips_present = false;
    std::optional<std::string> error;  // set when the pipeline failed mid-run

    std::string to_json() const;
    std::string to_csv() const;
};

// Precomputed LPIPS values keyed by (t, view); optional.
using LpipsTable = std::map<std::pair<int, int>, double>;

// Feeds input frames causally (first frame initializes, the rest step), and
// after every step renders the current field at each target pose and scores
// it against the held-out frame.
StageReport run_protocol(StreamReconstructor& reconstructor,
                         const std::vector<FrameObservation>& frames,
                         const std::vector<CameraPose>& poses,
                         const std::vector<CameraIntrinsics>& intrinsics, uint64_t seed,
                         const RenderSettings& render_settings,
                         const LpipsTable* lpips = nullptr);

}  // namespace streamsplat
