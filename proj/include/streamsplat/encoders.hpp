// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "streamsplat/geometry.hpp"
#include "streamsplat/types.hpp"

namespace streamsplat {

// Object orientation estimate: azimuth/polar feed the direction key, roll is
// carried but unused, sigma drives the read temperature.
struct DirectionEstimate {
    double theta = 0.0;  // azimuth, radians
    double phi = 0.0;    // polar, radians, in [0, pi]
    double gamma = 0.0;  // roll, radians (unused downstream)
    double sigma = 1.0;  // confidence in [0,1]
};

// Per-patch geometry/appearance summary produced by the value encoder and
// recovered from memory readouts.
struct PatchSummary {
    Vec3 centroid{};      // canonical space
    Vec3 color{};         // mean rgb
    double coverage = 0;  // fraction of patch pixels inside the mask
    double mean_depth = 0;
};

// Per-patch descriptors (mean/std rgb, patch center, mask coverage) mapped to
// feature_dim through a fixed seeded random projection, L2-normalized, scaled
// by latent_scale. Rows are patches in row-major patch order.
MatX latent_key_stub(const FrameObservation& frame, int patch_size, int feature_dim,
                     double latent_scale = 2.5);

// Ground-truth-pose orientation oracle for the object's canonical +Z axis,
// with an injected angular error uniform in [0, noise_deg] and confidence
// sigma = 1 - noise_deg/90.
DirectionEstimate direction_oracle(const CameraPose& gt_relative_pose, double noise_deg,
                                   uint64_t seed);

struct ValueEncoding {
    MatX values;                         // P x C
    std::vector<PatchSummary> summaries;  // P entries
};

// Back-projects masked pixels per patch through ground-truth depth and
// summarizes them. The raw summary occupies the leading components of each
// value vector so attention-weighted readouts stay decodable.
ValueEncoding value_stub(const FrameObservation& frame, const CameraPose& pose,
                         const CameraIntrinsics& intrinsics, int patch_size, int feature_dim);

// Recovers the summary embedded in a C-dim value (or readout) vector.
PatchSummary decode_value_summary(const double* value, int feature_dim);

// Smallest feature_dim the value layout supports.
constexpr int kMinFeatureDim = 16;
constexpr int kSummaryDims = 8;

}  // namespace streamsplat
