// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "streamsplat/types.hpp"

namespace streamsplat {

// Frame-folder dataset: frame_%05d.png, mask_%05d.png, optional
// depth_%05d.bin (little-endian float32), and poses.json with per-frame 4x4
// row-major world->camera matrices plus intrinsics.
struct Dataset {
    std::vector<FrameObservation> frames;
    std::vector<CameraPose> poses;
    CameraIntrinsics intrinsics;

    std::vector<CameraIntrinsics> per_frame_intrinsics() const {
        return std::vector<CameraIntrinsics>(frames.size(), intrinsics);
    }
};

void save_dataset(const std::string& dir, const Dataset& dataset);
Dataset load_dataset(const std::string& dir);

}  // namespace streamsplat
