// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "streamsplat/errors.hpp"
#include "streamsplat/geometry.hpp"
#include "streamsplat/image.hpp"

namespace streamsplat {

// Anisotropic 3D Gaussian. Color is degree-0 SH only (plain RGB); scale holds
// per-axis standard deviations.
struct GaussianPrimitive {
    Vec3f mu{};
    Quatf rot{};       // unit (w,x,y,z)
    Vec3f scale{};     // strictly positive
    Vec3f color{};     // [0,1]^3
    float opacity = 0.0f;  // [0,1]

    // Normalizes the quaternion and clamps color/opacity into range.
    static GaussianPrimitive make(Vec3 mu, Quatf rot, Vec3 scale, Vec3 color, double opacity);

    // Throws ValidationError on NaN position, non-unit rotation, or
    // non-positive scale; used on import paths.
    void validate() const;
};

enum class Subgroup : uint8_t { mem = 0, ref = 1, src = 2 };

struct GaussianField {
    std::vector<GaussianPrimitive> primitives;
    std::vector<Subgroup> subgroup;  // parallel to primitives

    size_t size() const { return primitives.size(); }

    void push_back(const GaussianPrimitive& p, Subgroup g) {
        primitives.push_back(p);
        subgroup.push_back(g);
    }

    void append(const GaussianField& other) {
        primitives.insert(primitives.end(), other.primitives.begin(), other.primitives.end());
        subgroup.insert(subgroup.end(), other.subgroup.begin(), other.subgroup.end());
    }

    size_t count(Subgroup g) const {
        size_t n = 0;
        for (Subgroup s : subgroup) n += (s == g) ? 1 : 0;
        return n;
    }
};

bool fields_equal(const GaussianField& a, const GaussianField& b);

// Rigid world->camera transform: x_cam = rotation * x_world + translation.
struct CameraPose {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    static CameraPose identity() { return {}; }

    // Throws ValidationError unless rotation^T rotation = I and det = +1,
    // both within 1e-6.
    void validate() const;

    CameraPose inverse() const;

    Vec3 apply(Vec3 p_world) const { return rotation * p_world + translation; }

    Vec3 camera_center() const { return -(transpose(rotation) * translation); }
};

// compose(a, b): first apply b, then a.
CameraPose compose(const CameraPose& a, const CameraPose& b);

// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    // Millimeter focal length mapped through a 36mm sensor width.
    static CameraIntrinsics from_focal_mm(double focal_mm, int width, int height,
                                          double sensor_mm = 36.0);

    void validate() const;
};

struct FrameObservation {
    Image rgb;
    Mask mask;
    std::optional<DepthMap> depth;  // synthetic ground truth only
    int t = 0;
};

// --- core operations -------------------------------------------------------

// Re-expresses a pose sequence relative to its first element: output[0] is
// exactly the identity and output[i] = poses[i] * poses[0]^-1. Idempotent.
std::vector<CameraPose> normalize_pose_sequence(const std::vector<CameraPose>& poses);

// Drops primitives invisible at inference time: opacity below opacity_eps or
// color within L-inf distance bg_distance of bg_color. Survivor order is
// preserved.
GaussianField filter_renderable(const GaussianField& field, Vec3f bg_color, double opacity_eps,
                                double bg_distance = 0.02);

}  // namespace streamsplat
