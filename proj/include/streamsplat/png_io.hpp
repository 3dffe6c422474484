// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "streamsplat/image.hpp"

namespace streamsplat {

// 8-bit RGB PNG; [0,1] floats are quantized by rounding half up.
void write_png_rgb(const std::string& path, const Image& image);
Image read_png_rgb(const std::string& path);

// 8-bit grayscale PNG; mask pixels are written 0 or 255 and any nonzero
// sample reads back as object.
void write_png_mask(const std::string& path, const Mask& mask);
Mask read_png_mask(const std::string& path);

// Raw little-endian float32 depth payload, row-major.
void write_depth_raw(const std::string& path, const DepthMap& depth);
DepthMap read_depth_raw(const std::string& path, int height, int width);

}  // namespace streamsplat
