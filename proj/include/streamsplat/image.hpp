// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "streamsplat/geometry.hpp"

namespace streamsplat {

// Row-major images, origin top-left, pixel centers at integer + 0.5.

struct Image {
    int height = 0, width = 0;
    std::vector<float> data;  // H*W*3, rgb interleaved, values in [0,1]

    Image() = default;
    Image(int h, int w, float fill = 0.0f)
        : height(h), width(w), data(static_cast<size_t>(h) * w * 3, fill) {}

    float* px(int row, int col) { return data.data() + (static_cast<size_t>(row) * width + col) * 3; }
    const float* px(int row, int col) const {
        return data.data() + (static_cast<size_t>(row) * width + col) * 3;
    }

    Vec3f rgb(int row, int col) const {
        const float* p = px(row, col);
        return {p[0], p[1], p[2]};
    }

    void set(int row, int col, Vec3f c) {
        float* p = px(row, col);
        p[0] = c.x; p[1] = c.y; p[2] = c.z;
    }

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
};

struct DepthMap {
    int height = 0, width = 0;
    std::vector<float> data;  // H*W

    DepthMap() = default;
    DepthMap(int h, int w, float fill = 0.0f)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    float& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    float at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
};

struct Mask {
    int height = 0, width = 0;
    std::vector<uint8_t> data;  // H*W, nonzero = object

    Mask() = default;
    Mask(int h, int w, uint8_t fill = 0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    uint8_t at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v ? 1 : 0;
        return n;
    }
};

}  // namespace streamsplat
