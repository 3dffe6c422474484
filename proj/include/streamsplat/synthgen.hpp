// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "streamsplat/rasterizer.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

// Closed C2 cubic spline through uniformly spaced knots, period 1.
class PeriodicSpline {
public:
    explicit PeriodicSpline(std::vector<Vec3> waypoints);

    Vec3 eval(double u) const;
    Vec3 eval_d1(double u) const;
    Vec3 eval_d2(double u) const;

    size_t waypoint_count() const { return points_.size(); }

private:
    std::vector<Vec3> points_;
    std::vector<Vec3> moments_;  // second derivatives at knots
    double h_;                   // knot spacing in parameter units
};

// Uniform parameter sampling of the closed interpolating spline.
std::vector<Vec3> periodic_cubic_spline(const std::vector<Vec3>& waypoints, int samples);

struct TrajectoryParams {
    int k1_elevations = 4;
    int k2_radii = 8;
    int waypoints = 100;
    double d_min = 1.5, d_max = 3.0;       // radius shell, world units (meters)
    double jitter = 0.05;                  // +-5 cm look-at jitter per axis
    std::vector<double> focal_set_mm = {30.0, 35.0, 40.0, 45.0, 50.0};
    int frame_count = 36;                  // cameras sampled from the spline
    int width = 64, height = 64;
    uint64_t seed = 1;
};

// Fly-around cameras: elevation/radius keys linearly interpolated over a full
// azimuth sweep, splined, sampled, each looking at the (jittered) center.
// Fully determined by params.seed.
std::vector<std::pair<CameraPose, CameraIntrinsics>> sample_trajectory(
    const TrajectoryParams& params, Vec3 lookat_center);

enum class ObjectKind { sphere, box, torus, composite };

ObjectKind object_kind_from_string(const std::string& name);

// Surface-sampled procedural object with smooth procedural colors, scales
// proportional to the local sample spacing, opacity in [0.7, 1.0].
GaussianField make_object(ObjectKind kind, uint64_t seed, int count);

// rgb/depth via the rasterizer; mask = alpha >= 0.5; depth always present.
std::vector<FrameObservation> render_sequence(
    const GaussianField& object,
    const std::vector<std::pair<CameraPose, CameraIntrinsics>>& trajectory,
    const RenderSettings& settings);

// Progressive frame sampling: strictly increasing indices whose consecutive
// gaps stay within gap_max = max(1, round(1 + progress * (sequence_len - 1))).
// progress 0 yields a consecutive run; progress 1 samples uniformly.
std::vector<int> curriculum_sampler(double progress, int sequence_len, int views_needed,
                                    uint64_t seed);

int curriculum_gap_max(double progress, int sequence_len);

}  // namespace streamsplat
