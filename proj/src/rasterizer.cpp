// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "streamsplat/errors.hpp"

namespace streamsplat {

std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& prim,
                                                  const CameraPose& pose,
                                                  const CameraIntrinsics& intrinsics,
                                                  const RenderSettings& settings) {
    const Vec3 p_cam = pose.apply(prim.mu.d());
    const double z = p_cam.z;
    if (!(z > settings.near && z < settings.far)) return std::nullopt;

    ProjectedGaussian out;
    out.depth = z;
    out.mean2d = {intrinsics.fx * p_cam.x / z + intrinsics.cx,
                  intrinsics.fy * p_cam.y / z + intrinsics.cy};

    // Sigma_3d = R S S^T R^T in world space.
    const Mat3 r = rotation_from_quat(prim.rot);
    Mat3 rs = r;
    for (int i = 0; i < 3; ++i) {
        rs.m[i][0] *= prim.scale.x;
        rs.m[i][1] *= prim.scale.y;
        rs.m[i][2] *= prim.scale.z;
    }
    const Mat3 sigma = rs * transpose(rs);

    // Rows of the 2x3 projection Jacobian d(u,v)/d(x_cam) composed with the
    // world->camera rotation.
    const double inv_z = 1.0 / z;
    const Vec3 j_u{intrinsics.fx * inv_z, 0.0, -intrinsics.fx * p_cam.x * inv_z * inv_z};
    const Vec3 j_v{0.0, intrinsics.fy * inv_z, -intrinsics.fy * p_cam.y * inv_z * inv_z};
    const Mat3 rot_t = transpose(pose.rotation);
    const Vec3 a = rot_t * j_u;  // row u of J * R as a world-space covector
    const Vec3 b = rot_t * j_v;

    out.cov2d.xx = dot(a, sigma * a) + settings.cov_lowpass;
    out.cov2d.xy = dot(a, sigma * b);
    out.cov2d.yy = dot(b, sigma * b) + settings.cov_lowpass;
    return out;
}

namespace {

struct Splat {
    Vec2 mean;
    double inv_xx, inv_xy, inv_yy;  // inverse 2D covariance
    double depth;
    double m_max;  // Mahalanobis bound beyond which alpha provably < cutoff
    Vec3 color;
    double opacity;
    size_t index;
};

struct PixelState {
    double transmittance = 1.0;
    double r = 0.0, g = 0.0, b = 0.0;
    double depth_acc = 0.0;
    double weight = 0.0;
    bool done = false;
};

// Shared per-(splat, pixel) compositing step so both renderers run the exact
// same arithmetic sequence.
inline void composite(const Splat& s, double px_center_x, double px_center_y, PixelState& st,
                      double alpha_cutoff, double transmittance_floor) {
    const double dx = px_center_x - s.mean.x;
    const double dy = px_center_y - s.mean.y;
    const double m = s.inv_xx * dx * dx + 2.0 * s.inv_xy * dx * dy + s.inv_yy * dy * dy;
    const double alpha = std::min(0.999, s.opacity * std::exp(-0.5 * m));
    if (alpha < alpha_cutoff) return;
    const double w = st.transmittance * alpha;
    st.r += w * s.color.x;
    st.g += w * s.color.y;
    st.b += w * s.color.z;
    st.depth_acc += w * s.depth;
    st.weight += w;
    st.transmittance *= 1.0 - alpha;
    if (st.transmittance < transmittance_floor) st.done = true;
}

std::vector<Splat> prepare(const GaussianField& field, const CameraPose& pose,
                           const CameraIntrinsics& intrinsics, const RenderSettings& settings,
                           int* skipped_singular) {
    std::vector<Splat> splats;
    splats.reserve(field.size());
    for (size_t i = 0; i < field.size(); ++i) {
        const auto& prim = field.primitives[i];
        const auto proj = project_gaussian(prim, pose, intrinsics, settings);
        if (!proj) continue;
        const double d = proj->cov2d.det();
        if (d < 1e-12) {
            ++*skipped_singular;
            continue;
        }
        Splat s;
        s.mean = proj->mean2d;
        s.inv_xx = proj->cov2d.yy / d;
        s.inv_xy = -proj->cov2d.xy / d;
        s.inv_yy = proj->cov2d.xx / d;
        s.depth = proj->depth;
        s.color = prim.color.d();
        s.opacity = prim.opacity;
        s.index = i;
        // alpha < cutoff is guaranteed once m > 2 ln(o / cutoff); the slack
        // keeps the bound robust to rounding at the boundary.
        s.m_max = 2.0 * std::log(s.opacity / settings.alpha_cutoff) + 0.1;
        splats.push_back(s);
    }
    std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.index < b.index;
    });
    return splats;
}

RenderOutput finalize(std::vector<PixelState>& px, const RenderSettings& settings,
                      int skipped_singular) {
    RenderOutput out;
    out.color = Image(settings.height, settings.width);
    out.depth = DepthMap(settings.height, settings.width);
    out.alpha = DepthMap(settings.height, settings.width);
    out.skipped_singular = skipped_singular;
    for (int row = 0; row < settings.height; ++row)
        for (int col = 0; col < settings.width; ++col) {
            const PixelState& st = px[static_cast<size_t>(row) * settings.width + col];
            const double t = st.transmittance;
            out.color.set(row, col,
                          {static_cast<float>(st.r + t * settings.bg_color.x),
                           static_cast<float>(st.g + t * settings.bg_color.y),
                           static_cast<float>(st.b + t * settings.bg_color.z)});
            out.alpha.at(row, col) = static_cast<float>(1.0 - t);
            out.depth.at(row, col) =
                st.weight > 0.0 ? static_cast<float>(st.depth_acc / st.weight) : 0.0f;
        }
    return out;
}

}  // namespace

RenderOutput render(const GaussianField& field, const CameraPose& pose,
                    const CameraIntrinsics& intrinsics, const RenderSettings& settings) {
    int skipped = 0;
    const auto splats = prepare(field, pose, intrinsics, settings, &skipped);
    std::vector<PixelState> px(static_cast<size_t>(settings.height) * settings.width);

    for (const Splat& s : splats) {
        if (s.m_max <= 0.0) continue;  // alpha < cutoff everywhere
        // Conservative pixel bounds: outside them m > m_max holds because
        // min over the other axis of d'Sigma^-1 d is dx^2/Sigma_xx.
        const double d = s.inv_xx * s.inv_yy - s.inv_xy * s.inv_xy;
        const double cov_xx = s.inv_yy / d;
        const double cov_yy = s.inv_xx / d;
        const double rx = std::sqrt(s.m_max * cov_xx);
        const double ry = std::sqrt(s.m_max * cov_yy);
        const int col0 = std::max(0, static_cast<int>(std::floor(s.mean.x - rx - 0.5)) - 1);
        const int col1 =
            std::min(settings.width - 1, static_cast<int>(std::ceil(s.mean.x + rx - 0.5)) + 1);
        const int row0 = std::max(0, static_cast<int>(std::floor(s.mean.y - ry - 0.5)) - 1);
        const int row1 =
            std::min(settings.height - 1, static_cast<int>(std::ceil(s.mean.y + ry - 0.5)) + 1);
        for (int row = row0; row <= row1; ++row) {
            PixelState* row_px = px.data() + static_cast<size_t>(row) * settings.width;
            for (int col = col0; col <= col1; ++col) {
                PixelState& st = row_px[col];
                if (st.done) continue;
                composite(s, col + 0.5, row + 0.5, st, settings.alpha_cutoff,
                          settings.transmittance_floor);
            }
        }
    }
    return finalize(px, settings, skipped);
}

RenderOutput render_bruteforce(const GaussianField& field, const CameraPose& pose,
                               const CameraIntrinsics& intrinsics,
                               const RenderSettings& settings) {
    int skipped = 0;
    const auto splats = prepare(field, pose, intrinsics, settings, &skipped);
    std::vector<PixelState> px(static_cast<size_t>(settings.height) * settings.width);

    for (int row = 0; row < settings.height; ++row)
        for (int col = 0; col < settings.width; ++col) {
            PixelState& st = px[static_cast<size_t>(row) * settings.width + col];
            for (const Splat& s : splats) {
                composite(s, col + 0.5, row + 0.5, st, settings.alpha_cutoff,
                          settings.transmittance_floor);
                if (st.done) break;
            }
        }
    return finalize(px, settings, skipped);
}

Mask mask_from_alpha(const RenderOutput& output, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ArgumentError("mask_from_alpha: threshold must be in (0,1)");
    Mask mask(output.alpha.height, output.alpha.width);
    for (int row = 0; row < mask.height; ++row)
        for (int col = 0; col < mask.width; ++col)
            mask.at(row, col) = output.alpha.at(row, col) >= threshold ? 255 : 0;
    return mask;
}

}  // namespace streamsplat
