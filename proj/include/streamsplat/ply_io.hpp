// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "streamsplat/types.hpp"

namespace streamsplat {

// Binary little-endian PLY with one vertex element carrying
//   x y z rot_w rot_x rot_y rot_z scale_x scale_y scale_z r g b opacity
// as float32 plus subgroup as uchar. Round trip is bit-exact.
void export_field(const GaussianField& field, const std::string& path);

// Throws FormatError (with byte offset) on malformed header, unknown
// property, or truncated payload; ValidationError on invalid primitives.
GaussianField import_field(const std::string& path);

}  // namespace streamsplat
