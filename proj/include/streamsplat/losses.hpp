// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "streamsplat/image.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

struct LossWeights {
    double lambda_g = 0.3;
    double lambda_bg = 0.3;
    double lambda_d = 0.5;   // warm-up value; main stage uses 0.0
    double alpha_bg = 0.5;
};

struct LossParts {
    double masked = 0.0;
    double bg = 0.0;
    double ray = 0.0;
    double depth = 0.0;
};

// Mean over mask pixels of the squared RGB difference (channels summed).
double masked_mse(const Image& render, const Image& target, const Mask& mask);

// Penalizes color/opacity of primitives outside the two-view visual hull:
// mean over offenders of (|c|^2 + alpha_bg * o); 0 when no primitive is
// outside. A primitive is outside when its projected mean leaves the mask in
// at least one view or sits behind either camera.
double bg_penalty(const GaussianField& field, const Mask& mask_ref, const CameraPose& pose_ref,
                  const Mask& mask_t, const CameraPose& pose_t,
                  const CameraIntrinsics& intrinsics, double alpha_bg);

// Pixel assignment for the ray loss: primitive k of the subset pairs with
// pixel (col, row) = assignment[k].
struct PixelAssign {
    int col = 0, row = 0;
};

// Mean of (1 - cos) between each assigned pixel ray and the ray toward the
// primitive mean; a mean coincident with the camera center contributes 2 and
// increments *flagged.
double ray_alignment(std::span<const GaussianPrimitive> subset, const CameraPose& pose,
                     const CameraIntrinsics& intrinsics, std::span<const PixelAssign> assignment,
                     int* flagged = nullptr);

// Analytic gradient of ray_alignment w.r.t. each primitive mean. Throws on a
// coincident center (gradient undefined there).
std::vector<Vec3> ray_alignment_grad(std::span<const GaussianPrimitive> subset,
                                     const CameraPose& pose, const CameraIntrinsics& intrinsics,
                                     std::span<const PixelAssign> assignment);

// Scale-free depth MSE: mean over mask of (d/d_mean - z/z_mean)^2.
double normalized_depth(const DepthMap& pred_depth, const DepthMap& gt_depth, const Mask& mask);

// L_total = L_masked + lambda_bg L_bg + lambda_g (L_ray + lambda_d L_depth).
double total_loss(const LossParts& parts, const LossWeights& weights);

// Max relative error between grad_fn and central differences of loss_fn,
// with absolute floor 1e-8.
double fd_check(const std::function<double(std::span<const double>)>& loss_fn,
                const std::function<std::vector<double>(std::span<const double>)>& grad_fn,
                std::span<const double> point, double h);

}  // namespace streamsplat
