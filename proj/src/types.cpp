// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/types.hpp"

#include <algorithm>
#include <cmath>

namespace streamsplat {

namespace {

float clamp01(double v) { return static_cast<float>(std::min(1.0, std::max(0.0, v))); }

}  // namespace

GaussianPrimitive GaussianPrimitive::make(Vec3 mu, Quatf rot, Vec3 scale, Vec3 color,
                                          double opacity) {
    if (scale.x <= 0.0 || scale.y <= 0.0 || scale.z <= 0.0)
        throw ArgumentError("gaussian scale components must be > 0");
    GaussianPrimitive p;
    p.mu = Vec3f::from(mu);
    p.rot = rot.normalized();
    p.scale = Vec3f::from(scale);
    p.color = {clamp01(color.x), clamp01(color.y), clamp01(color.z)};
    p.opacity = clamp01(opacity);
    return p;
}

void GaussianPrimitive::validate() const {
    const auto finite3 = [](Vec3f v) {
        return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
    };
    if (!finite3(mu)) throw ValidationError("gaussian position is not finite");
    if (!finite3(scale) || scale.x <= 0.0f || scale.y <= 0.0f || scale.z <= 0.0f)
        throw ValidationError("gaussian scale must be finite and > 0");
    if (std::abs(rot.norm() - 1.0) > 1e-6)
        throw ValidationError("gaussian rotation quaternion is not unit");
    if (!finite3(color) || !std::isfinite(opacity))
        throw ValidationError("gaussian color/opacity not finite");
    if (color.x < 0.0f || color.x > 1.0f || color.y < 0.0f || color.y > 1.0f ||
        color.z < 0.0f || color.z > 1.0f || opacity < 0.0f || opacity > 1.0f)
        throw ValidationError("gaussian color/opacity outside [0,1]");
}

bool fields_equal(const GaussianField& a, const GaussianField& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const auto& pa = a.primitives[i];
        const auto& pb = b.primitives[i];
        if (!(pa.mu == pb.mu && pa.rot == pb.rot && pa.scale == pb.scale &&
              pa.color == pb.color && pa.opacity == pb.opacity && a.subgroup[i] == b.subgroup[i]))
            return false;
    }
    return true;
}

void CameraPose::validate() const {
    const Mat3 rtr = transpose(rotation) * rotation;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(rtr.m[i][j] - expect) > 1e-6)
                throw ValidationError("camera rotation is not orthonormal");
        }
    if (std::abs(det(rotation) - 1.0) > 1e-6)
        throw ValidationError("camera rotation determinant is not +1");
    if (!std::isfinite(translation.x) || !std::isfinite(translation.y) ||
        !std::isfinite(translation.z))
        throw ValidationError("camera translation is not finite");
}

CameraPose CameraPose::inverse() const {
    CameraPose inv;
    inv.rotation = transpose(rotation);
    inv.translation = -(inv.rotation * translation);
    return inv;
}

CameraPose compose(const CameraPose& a, const CameraPose& b) {
    CameraPose r;
    r.rotation = a.rotation * b.rotation;
    r.translation = a.rotation * b.translation + a.translation;
    return r;
}

CameraIntrinsics CameraIntrinsics::from_focal_mm(double focal_mm, int width, int height,
                                                 double sensor_mm) {
    CameraIntrinsics k;
    k.fx = k.fy = focal_mm / sensor_mm * width;
    k.cx = width / 2.0;
    k.cy = height / 2.0;
    k.width = width;
    k.height = height;
    k.validate();
    return k;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("focal length must be > 0");
    if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
    if (cx < 0.0 || cx > width || cy < 0.0 || cy > height)
        throw ValidationError("principal point outside image");
}

std::vector<CameraPose> normalize_pose_sequence(const std::vector<CameraPose>& poses) {
    if (poses.empty()) throw ArgumentError("normalize_pose_sequence: empty pose list");
    for (const auto& p : poses) p.validate();

    const CameraPose first_inv = poses[0].inverse();
    std::vector<CameraPose> out;
    out.reserve(poses.size());
    out.push_back(CameraPose::identity());
    for (size_t i = 1; i < poses.size(); ++i) out.push_back(compose(poses[i], first_inv));
    return out;
}

GaussianField filter_renderable(const GaussianField& field, Vec3f bg_color, double opacity_eps,
                                double bg_distance) {
    if (opacity_eps < 0.0) throw ArgumentError("filter_renderable: opacity_eps must be >= 0");
    GaussianField out;
    for (size_t i = 0; i < field.size(); ++i) {
        const auto& p = field.primitives[i];
        if (p.opacity < opacity_eps) continue;
        const double dinf = std::max({std::abs(double(p.color.x) - bg_color.x),
                                      std::abs(double(p.color.y) - bg_color.y),
                                      std::abs(double(p.color.z) - bg_color.z)});
        if (dinf <= bg_distance) continue;
        out.push_back(p, field.subgroup[i]);
    }
    return out;
}

}  // namespace streamsplat
