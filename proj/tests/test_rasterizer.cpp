// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "streamsplat/errors.hpp"
#include "streamsplat/rasterizer.hpp"

using namespace streamsplat;

namespace {

CameraIntrinsics test_intrinsics(int size = 64) {
    return CameraIntrinsics::from_focal_mm(40.0, size, size);
}

RenderSettings test_settings(int size = 64) {
    RenderSettings s;
    s.width = s.height = size;
    return s;
}

// Numerical projection Jacobian: perturb the world-space mean, project,
// difference. The covariance oracle pushes the exact 3D covariance through
// this Jacobian.
Cov2 fd_projected_cov(const GaussianPrimitive& prim, const CameraPose& pose,
                      const CameraIntrinsics& k, const RenderSettings& settings) {
    const auto project_mean = [&](Vec3 mu) {
        const Vec3 cam = pose.apply(mu);
        return Vec2{k.fx * cam.x / cam.z + k.cx, k.fy * cam.y / cam.z + k.cy};
    };
    const double h = 1e-5;
    double jac[2][3];
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 plus = prim.mu.d(), minus = prim.mu.d();
        plus[axis] += h;
        minus[axis] -= h;
        const Vec2 a = project_mean(plus), b = project_mean(minus);
        jac[0][axis] = (a.x - b.x) / (2 * h);
        jac[1][axis] = (a.y - b.y) / (2 * h);
    }

    const Mat3 r = rotation_from_quat(prim.rot);
    Mat3 rs = r;
    for (int i = 0; i < 3; ++i) {
        rs.m[i][0] *= prim.scale.x;
        rs.m[i][1] *= prim.scale.y;
        rs.m[i][2] *= prim.scale.z;
    }
    const Mat3 sigma = rs * transpose(rs);

    double js[2][3] = {{0, 0, 0}, {0, 0, 0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l) js[i][j] += jac[i][l] * sigma.m[l][j];
    Cov2 out;
    out.xx = js[0][0] * jac[0][0] + js[0][1] * jac[0][1] + js[0][2] * jac[0][2] +
             settings.cov_lowpass;
    out.xy = js[0][0] * jac[1][0] + js[0][1] * jac[1][1] + js[0][2] * jac[1][2];
    out.yy = js[1][0] * jac[1][0] + js[1][1] * jac[1][1] + js[1][2] * jac[1][2] +
             settings.cov_lowpass;
    return out;
}

double max_channel_delta(const RenderOutput& a, const RenderOutput& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.color.data.size(); ++i)
        worst = std::max(worst, std::abs(double(a.color.data[i]) - double(b.color.data[i])));
    return worst;
}

}  // namespace

TEST_CASE("projection of an on-axis gaussian lands on the principal point") {
    const auto k = test_intrinsics();
    const auto s = test_settings();
    const auto prim =
        GaussianPrimitive::make({0, 0, 2.0}, Quatf{}, {0.1, 0.1, 0.1}, {1, 0, 0}, 1.0);
    const auto proj = project_gaussian(prim, CameraPose::identity(), k, s);
    REQUIRE(proj.has_value());
    CHECK(proj->mean2d.x == doctest::Approx(k.cx));
    CHECK(proj->mean2d.y == doctest::Approx(k.cy));
    CHECK(proj->depth == doctest::Approx(2.0));
}

TEST_CASE("near/far culling") {
    const auto k = test_intrinsics();
    const auto s = test_settings();
    const auto prim =
        GaussianPrimitive::make({0, 0, s.near / 2}, Quatf{}, {0.1, 0.1, 0.1}, {1, 0, 0}, 1.0);
    CHECK(!project_gaussian(prim, CameraPose::identity(), k, s).has_value());
    const auto far_prim =
        GaussianPrimitive::make({0, 0, s.far * 2}, Quatf{}, {0.1, 0.1, 0.1}, {1, 0, 0}, 1.0);
    CHECK(!project_gaussian(far_prim, CameraPose::identity(), k, s).has_value());
}

TEST_CASE("projected covariance matches the finite-difference jacobian oracle") {
    Rng rng(101);
    const auto k = test_intrinsics();
    const auto s = test_settings();
    int tested = 0;
    while (tested < 50) {
        const CameraPose pose = oracle::random_pose(rng, rng.uniform(2.0, 4.0));
        GaussianField field = oracle::random_field(rng, 1);
        const auto& prim = field.primitives[0];
        const auto proj = project_gaussian(prim, pose, k, s);
        if (!proj) continue;
        ++tested;
        const Cov2 want = fd_projected_cov(prim, pose, k, s);
        for (auto [got, expect] :
             {std::pair{proj->cov2d.xx, want.xx}, {proj->cov2d.xy, want.xy},
              {proj->cov2d.yy, want.yy}}) {
            const double denom = std::max({std::abs(expect), std::abs(got), 1e-8});
            CHECK(std::abs(got - expect) / denom < 1e-4);
        }
        CHECK(proj->cov2d.det() > 0.0);
        CHECK(proj->cov2d.xx > 0.0);
    }
}

TEST_CASE("empty field renders pure background") {
    const auto out = render(GaussianField{}, CameraPose::identity(), test_intrinsics(),
                            test_settings());
    for (int row = 0; row < 64; ++row)
        for (int col = 0; col < 64; ++col) {
            CHECK(out.color.rgb(row, col) == Vec3f{1, 1, 1});
            CHECK(out.alpha.at(row, col) == 0.0f);
            CHECK(out.depth.at(row, col) == 0.0f);
        }
}

TEST_CASE("single opaque gaussian peaks at the principal point") {
    GaussianField field;
    field.push_back(GaussianPrimitive::make({0, 0, 2}, Quatf{}, {0.15, 0.15, 0.15},
                                            {0.8, 0.2, 0.1}, 1.0),
                    Subgroup::src);
    const auto out = render(field, CameraPose::identity(), test_intrinsics(), test_settings());
    const float center = out.alpha.at(32, 32);
    CHECK(center > 0.9f);
    // Radially decreasing along a scanline from the center.
    for (int col = 33; col < 64; ++col)
        CHECK(out.alpha.at(32, col) <= out.alpha.at(32, col - 1) + 1e-6f);
}

TEST_CASE("fast renderer equals brute force on random scenes") {
    Rng rng(103);
    double worst = 0.0;
    for (int scene = 0; scene < 25; ++scene) {
        const int count = 1 + rng.uniform_int(64);
        const GaussianField field = oracle::random_field(rng, count);
        const CameraPose pose = oracle::random_pose(rng, rng.uniform(2.0, 5.0));
        const auto fast = render(field, pose, test_intrinsics(), test_settings());
        const auto brute = render_bruteforce(field, pose, test_intrinsics(), test_settings());
        worst = std::max(worst, max_channel_delta(fast, brute));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("renders agree exactly on trivial scenes") {
    const auto k = test_intrinsics();
    const auto s = test_settings();
    CHECK(max_channel_delta(render(GaussianField{}, CameraPose::identity(), k, s),
                            render_bruteforce(GaussianField{}, CameraPose::identity(), k, s)) ==
          0.0);

    GaussianField one;
    one.push_back(
        GaussianPrimitive::make({0.2, -0.1, 2}, Quatf{}, {0.2, 0.1, 0.15}, {0.3, 0.6, 0.9}, 0.8),
        Subgroup::src);
    CHECK(max_channel_delta(render(one, CameraPose::identity(), k, s),
                            render_bruteforce(one, CameraPose::identity(), k, s)) == 0.0);
}

TEST_CASE("rendering is bit-deterministic") {
    Rng rng(107);
    const GaussianField field = oracle::random_field(rng, 32);
    const CameraPose pose = oracle::random_pose(rng);
    const auto a = render(field, pose, test_intrinsics(), test_settings());
    const auto b = render(field, pose, test_intrinsics(), test_settings());
    CHECK(a.color.data == b.color.data);
    CHECK(a.depth.data == b.depth.data);
    CHECK(a.alpha.data == b.alpha.data);
}

TEST_CASE("alpha is monotone in a primitive's opacity") {
    // Opacities kept moderate so the transmittance floor is never hit.
    Rng rng(109);
    GaussianField field;
    for (int i = 0; i < 8; ++i)
        field.push_back(GaussianPrimitive::make({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                                                 2.0 + rng.uniform(-0.2, 0.2)},
                                                Quatf{}, {0.2, 0.2, 0.2},
                                                {rng.uniform(), rng.uniform(), rng.uniform()},
                                                rng.uniform(0.1, 0.5)),
                        Subgroup::src);
    const auto base = render(field, CameraPose::identity(), test_intrinsics(), test_settings());
    GaussianField bumped = field;
    bumped.primitives[3].opacity = 0.5f + 0.4f * bumped.primitives[3].opacity;
    const auto more = render(bumped, CameraPose::identity(), test_intrinsics(), test_settings());
    for (size_t i = 0; i < base.alpha.data.size(); ++i)
        CHECK(more.alpha.data[i] >= base.alpha.data[i] - 1e-7f);
}

TEST_CASE("filter_renderable with eps 0 and non-matching bg leaves renders unchanged") {
    Rng rng(113);
    const GaussianField field = oracle::random_field(rng, 24);
    const GaussianField filtered = filter_renderable(field, {-5, -5, -5}, 0.0);
    REQUIRE(filtered.size() == field.size());
    const CameraPose pose = oracle::random_pose(rng);
    const auto a = render(field, pose, test_intrinsics(), test_settings());
    const auto b = render(filtered, pose, test_intrinsics(), test_settings());
    CHECK(a.color.data == b.color.data);
}

TEST_CASE("mask_from_alpha") {
    const auto empty = render(GaussianField{}, CameraPose::identity(), test_intrinsics(),
                              test_settings());
    CHECK(mask_from_alpha(empty, 0.5).count() == 0);

    GaussianField big;
    big.push_back(GaussianPrimitive::make({0, 0, 1.0}, Quatf{}, {3, 3, 3}, {0.5, 0.5, 0.5}, 1.0),
                  Subgroup::src);
    const auto full = render(big, CameraPose::identity(), test_intrinsics(), test_settings());
    const Mask lo = mask_from_alpha(full, 0.2);
    const Mask hi = mask_from_alpha(full, 0.8);
    // Raising the threshold never grows the mask.
    CHECK(hi.count() <= lo.count());
    for (size_t i = 0; i < lo.data.size(); ++i)
        if (hi.data[i]) CHECK(lo.data[i]);

    CHECK_THROWS_AS(mask_from_alpha(full, 0.0), ArgumentError);
    CHECK_THROWS_AS(mask_from_alpha(full, 1.0), ArgumentError);
}

TEST_CASE("depth map is the alpha-weighted expected depth") {
    GaussianField field;
    field.push_back(
        GaussianPrimitive::make({0, 0, 2.0}, Quatf{}, {0.5, 0.5, 0.01}, {1, 0, 0}, 0.6),
        Subgroup::src);
    field.push_back(
        GaussianPrimitive::make({0, 0, 3.0}, Quatf{}, {0.5, 0.5, 0.01}, {0, 1, 0}, 0.6),
        Subgroup::src);
    const auto out = render(field, CameraPose::identity(), test_intrinsics(), test_settings());
    const float d = out.depth.at(32, 32);
    // Between the two surfaces, biased toward the nearer (front-to-back weights).
    CHECK(d > 2.0f);
    CHECK(d < 3.0f);
    CHECK(d < 2.5f);
}
