// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/losses.hpp"

#include <cmath>
#include <string>

#include "streamsplat/errors.hpp"

namespace streamsplat {

double masked_mse(const Image& render, const Image& target, const Mask& mask) {
    if (render.height != target.height || render.width != target.width ||
        render.height != mask.height || render.width != mask.width)
        throw ArgumentError("masked_mse: shape mismatch");

    double sum = 0.0;
    size_t count = 0;
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col) {
            if (!mask.at(row, col)) continue;
            const float* a = render.px(row, col);
            const float* b = target.px(row, col);
            for (int c = 0; c < 3; ++c) {
                const double d = double(a[c]) - double(b[c]);
                sum += d * d;
            }
            ++count;
        }
    if (count == 0) throw UndefinedLossError("masked_mse: empty mask");
    return sum / static_cast<double>(count);
}

namespace {

// Projected pixel of a world point, or nothing when behind the camera.
std::optional<Vec2> project_point(const CameraPose& pose, const CameraIntrinsics& k, Vec3 p) {
    const Vec3 cam = pose.apply(p);
    if (cam.z <= 0.0) return std::nullopt;
    return Vec2{k.fx * cam.x / cam.z + k.cx, k.fy * cam.y / cam.z + k.cy};
}

bool inside_mask(const Mask& mask, const std::optional<Vec2>& px) {
    if (!px) return false;  // behind the camera counts as outside
    const int col = static_cast<int>(std::floor(px->x));
    const int row = static_cast<int>(std::floor(px->y));
    if (col < 0 || col >= mask.width || row < 0 || row >= mask.height) return false;
    return mask.at(row, col) != 0;
}

}  // namespace

double bg_penalty(const GaussianField& field, const Mask& mask_ref, const CameraPose& pose_ref,
                  const Mask& mask_t, const CameraPose& pose_t,
                  const CameraIntrinsics& intrinsics, double alpha_bg) {
    double sum = 0.0;
    size_t count = 0;
    for (const auto& prim : field.primitives) {
        const Vec3 mu = prim.mu.d();
        const bool in_ref = inside_mask(mask_ref, project_point(pose_ref, intrinsics, mu));
        const bool in_cur = inside_mask(mask_t, project_point(pose_t, intrinsics, mu));
        if (in_ref && in_cur) continue;  // inside the visual hull
        const Vec3 c = prim.color.d();
        sum += dot(c, c) + alpha_bg * prim.opacity;
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

namespace {

Vec3 pixel_ray_world(const CameraPose& pose, const CameraIntrinsics& k, PixelAssign px) {
    const Vec3 dir_cam{(px.col + 0.5 - k.cx) / k.fx, (px.row + 0.5 - k.cy) / k.fy, 1.0};
    return normalized(transpose(pose.rotation) * dir_cam);
}

}  // namespace

double ray_alignment(std::span<const GaussianPrimitive> subset, const CameraPose& pose,
                     const CameraIntrinsics& intrinsics, std::span<const PixelAssign> assignment,
                     int* flagged) {
    if (subset.size() != assignment.size())
        throw ArgumentError("ray_alignment: subset/assignment size mismatch");
    if (subset.empty()) throw ArgumentError("ray_alignment: empty subset");

    const Vec3 center = pose.camera_center();
    double sum = 0.0;
    int flags = 0;
    for (size_t i = 0; i < subset.size(); ++i) {
        const Vec3 to_mu = subset[i].mu.d() - center;
        const double dist = norm(to_mu);
        if (dist < 1e-9) {
            sum += 2.0;  // coincident with the camera center
            ++flags;
            continue;
        }
        const Vec3 ray = pixel_ray_world(pose, intrinsics, assignment[i]);
        sum += 1.0 - dot(ray, to_mu / dist);
    }
    if (flagged) *flagged = flags;
    return sum / static_cast<double>(subset.size());
}

std::vector<Vec3> ray_alignment_grad(std::span<const GaussianPrimitive> subset,
                                     const CameraPose& pose, const CameraIntrinsics& intrinsics,
                                     std::span<const PixelAssign> assignment) {
    if (subset.size() != assignment.size())
        throw ArgumentError("ray_alignment_grad: subset/assignment size mismatch");
    if (subset.empty()) throw ArgumentError("ray_alignment_grad: empty subset");

    const Vec3 center = pose.camera_center();
    const double inv_n = 1.0 / static_cast<double>(subset.size());
    std::vector<Vec3> grads(subset.size());
    for (size_t i = 0; i < subset.size(); ++i) {
        const Vec3 to_mu = subset[i].mu.d() - center;
        const double dist = norm(to_mu);
        if (dist < 1e-9)
            throw ArgumentError("ray_alignment_grad: mean coincident with camera center");
        const Vec3 mu_hat = to_mu / dist;
        const Vec3 ray = pixel_ray_world(pose, intrinsics, assignment[i]);
        // d(1 - r . mu_hat)/d mu = -(I - mu_hat mu_hat^T) r / |mu - c|
        const Vec3 tangential = ray - dot(ray, mu_hat) * mu_hat;
        grads[i] = (-inv_n / dist) * tangential;
    }
    return grads;
}

double normalized_depth(const DepthMap& pred_depth, const DepthMap& gt_depth, const Mask& mask) {
    if (pred_depth.height != gt_depth.height || pred_depth.width != gt_depth.width ||
        pred_depth.height != mask.height || pred_depth.width != mask.width)
        throw ArgumentError("normalized_depth: shape mismatch");

    double pred_sum = 0.0, gt_sum = 0.0;
    size_t count = 0;
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col) {
            if (!mask.at(row, col)) continue;
            const double d = pred_depth.at(row, col);
            const double z = gt_depth.at(row, col);
            if (!(d > 0.0) || !(z > 0.0))
                throw ArgumentError("normalized_depth: depths must be positive on the mask");
            pred_sum += d;
            gt_sum += z;
            ++count;
        }
    if (count == 0) throw UndefinedLossError("normalized_depth: empty mask");
    const double pred_mean = pred_sum / count;
    const double gt_mean = gt_sum / count;
    if (pred_mean < 1e-9 || gt_mean < 1e-9)
        throw UndefinedLossError("normalized_depth: degenerate mean depth");

    double sum = 0.0;
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col) {
            if (!mask.at(row, col)) continue;
            const double d = pred_depth.at(row, col) / pred_mean - gt_depth.at(row, col) / gt_mean;
            sum += d * d;
        }
    return sum / static_cast<double>(count);
}

double total_loss(const LossParts& parts, const LossWeights& weights) {
    const auto check = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw PropagationError(std::string("total_loss: non-finite part ") + name);
    };
    check(parts.masked, "L_masked");
    check(parts.bg, "L_bg");
    check(parts.ray, "L_ray");
    check(parts.depth, "L_depth");
    return parts.masked + weights.lambda_bg * parts.bg +
           weights.lambda_g * (parts.ray + weights.lambda_d * parts.depth);
}

double fd_check(const std::function<double(std::span<const double>)>& loss_fn,
                const std::function<std::vector<double>(std::span<const double>)>& grad_fn,
                std::span<const double> point, double h) {
    if (!(h > 0.0)) throw ArgumentError("fd_check: h must be > 0");
    std::vector<double> x(point.begin(), point.end());
    const std::vector<double> grad = grad_fn(x);
    if (grad.size() != x.size()) throw ArgumentError("fd_check: gradient size mismatch");

    double worst = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double f_plus = loss_fn(x);
        x[i] = orig - h;
        const double f_minus = loss_fn(x);
        x[i] = orig;
        const double fd = (f_plus - f_minus) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - grad[i]) / denom);
    }
    return worst;
}

}  // namespace streamsplat
