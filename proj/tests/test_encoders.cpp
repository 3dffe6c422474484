// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "streamsplat/encoders.hpp"
#include "streamsplat/errors.hpp"
#include "streamsplat/synthgen.hpp"

using namespace streamsplat;

namespace {

FrameObservation uniform_frame(int size, Vec3f color, bool full_mask = true) {
    FrameObservation f;
    f.rgb = Image(size, size);
    for (int row = 0; row < size; ++row)
        for (int col = 0; col < size; ++col) f.rgb.set(row, col, color);
    f.mask = Mask(size, size, full_mask ? 255 : 0);
    return f;
}

FrameObservation random_frame(Rng& rng, int size) {
    FrameObservation f;
    f.rgb = oracle::random_image(rng, size, size);
    f.mask = Mask(size, size);
    for (auto& v : f.mask.data) v = rng.uniform() < 0.5 ? 255 : 0;
    return f;
}

}  // namespace

TEST_CASE("latent keys are deterministic and patch-structured") {
    const auto frame = uniform_frame(32, {0.3f, 0.5f, 0.7f});
    const MatX keys = latent_key_stub(frame, 8, 32);
    REQUIRE(keys.rows == 16);
    REQUIRE(keys.cols == 32);

    const MatX again = latent_key_stub(frame, 8, 32);
    CHECK(keys.data == again.data);

    // Uniform color: all appearance components identical, keys differ only
    // through the patch-center coordinates.
    for (int p = 1; p < keys.rows; ++p) {
        double diff = 0.0;
        for (int c = 0; c < keys.cols; ++c) diff += std::abs(keys.at(p, c) - keys.at(0, c));
        CHECK(diff > 1e-9);  // positions distinguish the patches
    }

    CHECK_THROWS_AS(latent_key_stub(frame, 5, 32), ArgumentError);
}

TEST_CASE("latent keys have the configured scale") {
    Rng rng(3);
    const auto frame = random_frame(rng, 32);
    const MatX keys = latent_key_stub(frame, 8, 24, 3.0);
    for (int p = 0; p < keys.rows; ++p) {
        double n = 0.0;
        for (int c = 0; c < keys.cols; ++c) n += keys.at(p, c) * keys.at(p, c);
        CHECK(std::sqrt(n) == doctest::Approx(3.0).epsilon(1e-9));
    }
}

TEST_CASE("latent projection keeps distinct descriptors distinct") {
    Rng rng(5);
    std::vector<std::vector<double>> seen;
    int collisions = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto frame = random_frame(rng, 16);
        const MatX keys = latent_key_stub(frame, 8, 16);
        for (int p = 0; p < keys.rows; ++p) {
            std::vector<double> key(keys.row_ptr(p), keys.row_ptr(p) + keys.cols);
            for (const auto& other : seen) {
                double d = 0.0;
                for (int c = 0; c < keys.cols; ++c) d = std::max(d, std::abs(key[c] - other[c]));
                if (d < 1e-9) ++collisions;
            }
            seen.push_back(std::move(key));
            if (seen.size() > 400) seen.erase(seen.begin());  // bounded pairwise scan
        }
    }
    CHECK(collisions == 0);
}

TEST_CASE("direction oracle without noise is exact") {
    const DirectionEstimate est = direction_oracle(CameraPose::identity(), 0.0, 1);
    CHECK(est.theta == doctest::Approx(0.0));
    CHECK(est.phi == doctest::Approx(0.0));
    CHECK(est.sigma == doctest::Approx(1.0));

    // The reconstructed key equals the rotated canonical axis.
    Rng rng(7);
    for (int i = 0; i < 25; ++i) {
        const CameraPose pose = oracle::random_pose(rng);
        const DirectionEstimate e = direction_oracle(pose, 0.0, i);
        const Vec3 key = direction_key_from_angles(e.theta, e.phi);
        const Vec3 axis = normalized(pose.rotation.col(2));
        CHECK(norm(key - axis) < 1e-9);
        CHECK(e.phi >= 0.0);
        CHECK(e.phi <= 3.14159265358979323846);
    }
}

TEST_CASE("direction oracle error is bounded by noise_deg") {
    Rng rng(11);
    for (double noise_deg : {5.0, 30.0, 90.0}) {
        for (int i = 0; i < 50; ++i) {
            const CameraPose pose = oracle::random_pose(rng);
            const DirectionEstimate e = direction_oracle(pose, noise_deg, 100 + i);
            const Vec3 key = direction_key_from_angles(e.theta, e.phi);
            const Vec3 axis = normalized(pose.rotation.col(2));
            const double angle =
                std::acos(std::min(1.0, std::max(-1.0, dot(key, axis))));
            CHECK(angle <= noise_deg * 3.14159265358979323846 / 180.0 + 1e-9);
        }
    }
    CHECK(direction_oracle(CameraPose::identity(), 90.0, 1).sigma == doctest::Approx(0.0));
    CHECK(direction_oracle(CameraPose::identity(), 45.0, 1).sigma == doctest::Approx(0.5));
    // Through the temperature rule, zero confidence lands at tau = 2.5.
    CHECK(temperature(direction_oracle(CameraPose::identity(), 90.0, 1).sigma) ==
          doctest::Approx(2.5));
}

TEST_CASE("value stub summaries") {
    SUBCASE("missing depth is unsupported") {
        const auto frame = uniform_frame(16, {0.5f, 0.5f, 0.5f});
        const auto k = CameraIntrinsics::from_focal_mm(40, 16, 16);
        CHECK_THROWS_AS(value_stub(frame, CameraPose::identity(), k, 8, 16),
                        UnsupportedInputError);
    }

    SUBCASE("empty-mask patch gives a zero summary") {
        auto frame = uniform_frame(16, {0.5f, 0.5f, 0.5f}, false);
        frame.depth = DepthMap(16, 16, 2.0f);
        const auto k = CameraIntrinsics::from_focal_mm(40, 16, 16);
        const auto enc = value_stub(frame, CameraPose::identity(), k, 8, 16);
        for (const auto& s : enc.summaries) {
            CHECK(s.coverage == 0.0);
            CHECK(norm(s.centroid) == 0.0);
        }
    }

    SUBCASE("single-pixel patch back-projects exactly") {
        auto frame = uniform_frame(16, {0.25f, 0.5f, 0.75f}, false);
        frame.mask.at(3, 5) = 255;
        frame.depth = DepthMap(16, 16, 2.0f);
        const auto k = CameraIntrinsics::from_focal_mm(40, 16, 16);
        const auto enc = value_stub(frame, CameraPose::identity(), k, 8, 16);
        const auto& s = enc.summaries[0];  // patch (0,0) holds pixel (3,5)
        const Vec3 expect{(5 + 0.5 - k.cx) / k.fx * 2.0, (3 + 0.5 - k.cy) / k.fy * 2.0, 2.0};
        CHECK(norm(s.centroid - expect) < 1e-9);
        CHECK(s.coverage == doctest::Approx(1.0 / 64.0));
        CHECK(s.mean_depth == doctest::Approx(2.0));
    }

    SUBCASE("summary embeds verbatim in the value vector") {
        Rng rng(13);
        auto frame = random_frame(rng, 16);
        frame.depth = DepthMap(16, 16, 1.5f);
        const auto k = CameraIntrinsics::from_focal_mm(40, 16, 16);
        const auto enc = value_stub(frame, CameraPose::identity(), k, 8, 32);
        for (int p = 0; p < enc.values.rows; ++p) {
            const PatchSummary s = decode_value_summary(enc.values.row_ptr(p), 32);
            CHECK(norm(s.centroid - enc.summaries[p].centroid) < 1e-12);
            CHECK(s.coverage == doctest::Approx(enc.summaries[p].coverage));
            CHECK(s.mean_depth == doctest::Approx(enc.summaries[p].mean_depth));
        }
    }
}

TEST_CASE("back-projection of a rendered sphere lands near the surface") {
    // Geometric oracle: render the synthetic unit sphere, back-project mask
    // pixels through the oracle depth, measure distance from the surface.
    // Pixels near the silhouette mix grazing-ray depths, so the bound is
    // checked over the eroded mask interior.
    const GaussianField sphere = make_object(ObjectKind::sphere, 33, 20000);
    TrajectoryParams params;
    params.seed = 33;
    params.frame_count = 4;
    params.jitter = 0.0;
    const auto trajectory = sample_trajectory(params, {0, 0, 0});
    RenderSettings settings;
    const auto frames = render_sequence(sphere, trajectory, settings);

    for (size_t i = 0; i < frames.size(); ++i) {
        const auto& frame = frames[i];
        const auto& pose = trajectory[i].first;
        const auto& k = trajectory[i].second;
        const Mat3 rot_t = transpose(pose.rotation);
        const auto interior = [&](int row, int col) {
            for (int dr = -2; dr <= 2; ++dr)
                for (int dc = -2; dc <= 2; ++dc) {
                    const int r = row + dr, c = col + dc;
                    if (r < 0 || r >= k.height || c < 0 || c >= k.width || !frame.mask.at(r, c))
                        return false;
                }
            return true;
        };
        double err_sum = 0.0;
        int counted = 0;
        for (int row = 0; row < k.height; ++row)
            for (int col = 0; col < k.width; ++col) {
                if (!frame.mask.at(row, col) || !interior(row, col)) continue;
                const double d = frame.depth->at(row, col);
                const Vec3 cam{(col + 0.5 - k.cx) / k.fx * d, (row + 0.5 - k.cy) / k.fy * d, d};
                const Vec3 world = rot_t * (cam - pose.translation);
                err_sum += std::abs(norm(world) - 1.0);
                ++counted;
            }
        REQUIRE(counted > 0);
        CHECK(err_sum / counted < 0.02);  // within 2% of the unit sphere radius
    }

    // Patch summaries inherit the same geometry: centroids of well-covered
    // patches sit near the surface (chord averaging adds a little slack).
    const auto enc = value_stub(frames[0], trajectory[0].first, trajectory[0].second, 8, 16);
    double patch_err = 0.0;
    int patches = 0;
    for (const auto& s : enc.summaries) {
        if (s.coverage < 0.9) continue;
        patch_err += std::abs(norm(s.centroid) - 1.0);
        ++patches;
    }
    REQUIRE(patches > 0);
    CHECK(patch_err / patches < 0.04);
}
