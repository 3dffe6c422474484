// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "streamsplat/errors.hpp"

namespace streamsplat {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(float v) {
    const double scaled = std::floor(double(v) * 255.0 + 0.5);
    return static_cast<uint8_t>(std::min(255.0, std::max(0.0, scaled)));
}

void write_png(const std::string& path, int height, int width, int color_type,
               const std::vector<uint8_t>& bytes, int channels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ArgumentError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("png write failed for " + path, 0);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
        rows[r] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(r) * width * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void read_png(const std::string& path, int expected_channels, int& height, int& width,
              std::vector<uint8_t>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ArgumentError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("png read failed for " + path, 0);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (expected_channels == 3) {
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    } else {
        if (color_type & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);

    bytes.resize(static_cast<size_t>(height) * width * expected_channels);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
        rows[r] = bytes.data() + static_cast<size_t>(r) * width * expected_channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void write_png_rgb(const std::string& path, const Image& image) {
    std::vector<uint8_t> bytes(image.data.size());
    for (size_t i = 0; i < image.data.size(); ++i) bytes[i] = quantize(image.data[i]);
    write_png(path, image.height, image.width, PNG_COLOR_TYPE_RGB, bytes, 3);
}

Image read_png_rgb(const std::string& path) {
    int h = 0, w = 0;
    std::vector<uint8_t> bytes;
    read_png(path, 3, h, w, bytes);
    Image img(h, w);
    for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0f;
    return img;
}

void write_png_mask(const std::string& path, const Mask& mask) {
    std::vector<uint8_t> bytes(mask.data.size());
    for (size_t i = 0; i < mask.data.size(); ++i) bytes[i] = mask.data[i] ? 255 : 0;
    write_png(path, mask.height, mask.width, PNG_COLOR_TYPE_GRAY, bytes, 1);
}

Mask read_png_mask(const std::string& path) {
    int h = 0, w = 0;
    std::vector<uint8_t> bytes;
    read_png(path, 1, h, w, bytes);
    Mask mask(h, w);
    for (size_t i = 0; i < bytes.size(); ++i) mask.data[i] = bytes[i] ? 255 : 0;
    return mask;
}

void write_depth_raw(const std::string& path, const DepthMap& depth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(depth.data.data()),
              static_cast<std::streamsize>(depth.data.size() * sizeof(float)));
    if (!out) throw ArgumentError("depth write failed for " + path);
}

DepthMap read_depth_raw(const std::string& path, int height, int width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path);
    DepthMap depth(height, width);
    in.read(reinterpret_cast<char*>(depth.data.data()),
            static_cast<std::streamsize>(depth.data.size() * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != depth.data.size() * sizeof(float))
        throw FormatError("truncated depth file " + path, static_cast<size_t>(in.gcount()));
    return depth;
}

}  // namespace streamsplat
