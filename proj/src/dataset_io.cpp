// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/dataset_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "streamsplat/errors.hpp"
#include "streamsplat/png_io.hpp"

namespace streamsplat {

namespace {

namespace fs = std::filesystem;

std::string frame_name(const char* prefix, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%05d.%s", prefix, i, ext);
    return buf;
}

nlohmann::json pose_to_json(const CameraPose& pose) {
    auto m = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m.push_back(pose.rotation.m[r][c]);
        m.push_back(pose.translation[r]);
    }
    for (double v : {0.0, 0.0, 0.0, 1.0}) m.push_back(v);
    return m;
}

CameraPose pose_from_json(const nlohmann::json& m) {
    if (!m.is_array() || m.size() != 16)
        throw FormatError("world_to_camera must hold 16 numbers", 0);
    CameraPose pose;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pose.rotation.m[r][c] = m[r * 4 + c].get<double>();
        pose.translation[r] = m[r * 4 + 3].get<double>();
    }
    pose.validate();
    return pose;
}

}  // namespace

void save_dataset(const std::string& dir, const Dataset& dataset) {
    if (dataset.frames.size() != dataset.poses.size())
        throw ArgumentError("save_dataset: frames/poses size mismatch");
    fs::create_directories(dir);

    nlohmann::json j;
    j["intrinsics"] = {{"fx", dataset.intrinsics.fx},       {"fy", dataset.intrinsics.fy},
                       {"cx", dataset.intrinsics.cx},       {"cy", dataset.intrinsics.cy},
                       {"width", dataset.intrinsics.width}, {"height", dataset.intrinsics.height}};
    auto frames_json = nlohmann::json::array();
    for (size_t i = 0; i < dataset.frames.size(); ++i) {
        const auto& frame = dataset.frames[i];
        write_png_rgb(dir + "/" + frame_name("frame", int(i), "png"), frame.rgb);
        write_png_mask(dir + "/" + frame_name("mask", int(i), "png"), frame.mask);
        if (frame.depth)
            write_depth_raw(dir + "/" + frame_name("depth", int(i), "bin"), *frame.depth);
        frames_json.push_back(
            {{"t", int(i)}, {"world_to_camera", pose_to_json(dataset.poses[i])}});
    }
    j["frames"] = std::move(frames_json);

    std::ofstream out(dir + "/poses.json");
    if (!out) throw ArgumentError("save_dataset: cannot write poses.json in " + dir);
    out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream in(dir + "/poses.json");
    if (!in) throw ArgumentError("load_dataset: missing poses.json in " + dir);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("poses.json parse error: ") + e.what(), 0);
    }

    Dataset dataset;
    const auto& intr = j.at("intrinsics");
    dataset.intrinsics.fx = intr.at("fx").get<double>();
    dataset.intrinsics.fy = intr.at("fy").get<double>();
    dataset.intrinsics.cx = intr.at("cx").get<double>();
    dataset.intrinsics.cy = intr.at("cy").get<double>();
    dataset.intrinsics.width = intr.at("width").get<int>();
    dataset.intrinsics.height = intr.at("height").get<int>();
    dataset.intrinsics.validate();

    for (const auto& f : j.at("frames")) {
        const int t = f.at("t").get<int>();
        dataset.poses.push_back(pose_from_json(f.at("world_to_camera")));
        FrameObservation frame;
        frame.t = t;
        frame.rgb = read_png_rgb(dir + "/" + frame_name("frame", t, "png"));
        frame.mask = read_png_mask(dir + "/" + frame_name("mask", t, "png"));
        const std::string depth_path = dir + "/" + frame_name("depth", t, "bin");
        if (fs::exists(depth_path))
            frame.depth = read_depth_raw(depth_path, frame.rgb.height, frame.rgb.width);
        dataset.frames.push_back(std::move(frame));
    }
    return dataset;
}

}  // namespace streamsplat
