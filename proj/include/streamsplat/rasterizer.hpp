// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "streamsplat/image.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

struct RenderSettings {
    double near = 0.1;
    double far = 100.0;
    Vec3f bg_color{1.0f, 1.0f, 1.0f};
    int height = 64, width = 64;
    double alpha_cutoff = 1.0 / 255.0;
    double transmittance_floor = 1e-4;
    double cov_lowpass = 0.3;  // px^2 added to the 2D covariance diagonal
};

struct RenderOutput {
    Image color;          // composited over bg_color
    DepthMap depth;       // alpha-weighted expected depth, 0 where alpha = 0
    DepthMap alpha;       // accumulated opacity in [0,1]
    int skipped_singular = 0;
};

struct ProjectedGaussian {
    Vec2 mean2d;      // pixel coordinates
    Cov2 cov2d;       // after low-pass
    double depth;     // camera-space z
};

// EWA projection of one primitive. Empty when the camera-space depth falls
// outside (near, far).
std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& prim,
                                                  const CameraPose& pose,
                                                  const CameraIntrinsics& intrinsics,
                                                  const RenderSettings& settings);

// Front-to-back compositing over a global depth sort (stable index
// tie-break). Per-splat contribution: alpha = min(0.999, o * exp(-m/2)),
// skipped below alpha_cutoff; a pixel stops accumulating once its
// transmittance drops below transmittance_floor.
RenderOutput render(const GaussianField& field, const CameraPose& pose,
                    const CameraIntrinsics& intrinsics, const RenderSettings& settings);

// Same contract evaluated as a plain per-pixel loop over every depth-sorted
// primitive; the verification oracle for render.
RenderOutput render_bruteforce(const GaussianField& field, const CameraPose& pose,
                               const CameraIntrinsics& intrinsics,
                               const RenderSettings& settings);

// mask[p] = alpha[p] >= threshold; threshold must lie in (0,1).
Mask mask_from_alpha(const RenderOutput& output, double threshold);

}  // namespace streamsplat
