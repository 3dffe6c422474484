// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "streamsplat/errors.hpp"
#include "streamsplat/random.hpp"

namespace streamsplat {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cyclic tridiagonal solve (coefficients 1,4,1) via dense elimination; knot
// counts are small so O(n^3) is irrelevant.
std::vector<Vec3> solve_periodic_moments(const std::vector<Vec3>& y, double h) {
    const int n = static_cast<int>(y.size());
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<Vec3> rhs(n);
    for (int i = 0; i < n; ++i) {
        a[i][(i + n - 1) % n] += 1.0;
        a[i][i] += 4.0;
        a[i][(i + 1) % n] += 1.0;
        const Vec3 d2 = y[(i + n - 1) % n] - 2.0 * y[i] + y[(i + 1) % n];
        rhs[i] = (6.0 / (h * h)) * d2;
    }
    // Gaussian elimination with partial pivoting, three simultaneous rhs.
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        const double inv = 1.0 / a[col][col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<Vec3> m(n);
    for (int r = n - 1; r >= 0; --r) {
        Vec3 acc = rhs[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * m[c];
        m[r] = acc / a[r][r];
    }
    return m;
}

}  // namespace

PeriodicSpline::PeriodicSpline(std::vector<Vec3> waypoints) : points_(std::move(waypoints)) {
    if (points_.size() < 3) throw ArgumentError("periodic spline needs at least 3 waypoints");
    h_ = 1.0 / static_cast<double>(points_.size());
    moments_ = solve_periodic_moments(points_, h_);
}

Vec3 PeriodicSpline::eval(double u) const {
    const int n = static_cast<int>(points_.size());
    u -= std::floor(u);
    const double s = u * n;
    int i = std::min(static_cast<int>(s), n - 1);
    const double t = s - i;  // local coordinate in [0,1)
    const int j = (i + 1) % n;
    const double omt = 1.0 - t;
    const double h2_6 = h_ * h_ / 6.0;
    return omt * points_[i] + t * points_[j] +
           h2_6 * ((omt * omt * omt - omt) * moments_[i] + (t * t * t - t) * moments_[j]);
}

Vec3 PeriodicSpline::eval_d1(double u) const {
    const int n = static_cast<int>(points_.size());
    u -= std::floor(u);
    const double s = u * n;
    int i = std::min(static_cast<int>(s), n - 1);
    const double t = s - i;
    const int j = (i + 1) % n;
    const double omt = 1.0 - t;
    return (1.0 / h_) * (points_[j] - points_[i]) +
           (h_ / 6.0) * ((1.0 - 3.0 * omt * omt) * moments_[i] + (3.0 * t * t - 1.0) * moments_[j]);
}

Vec3 PeriodicSpline::eval_d2(double u) const {
    const int n = static_cast<int>(points_.size());
    u -= std::floor(u);
    const double s = u * n;
    int i = std::min(static_cast<int>(s), n - 1);
    const double t = s - i;
    const int j = (i + 1) % n;
    return (1.0 - t) * moments_[i] + t * moments_[j];
}

std::vector<Vec3> periodic_cubic_spline(const std::vector<Vec3>& waypoints, int samples) {
    PeriodicSpline spline(waypoints);
    std::vector<Vec3> out;
    out.reserve(samples);
    for (int i = 0; i < samples; ++i)
        out.push_back(spline.eval(static_cast<double>(i) / samples));
    return out;
}

namespace {

// World up is +Z; elevation keys stay clear of the poles so the Track-To
// frame is well defined under jitter.
constexpr double kElevationRange = 1.1;

CameraPose look_at(Vec3 eye, Vec3 target) {
    const Vec3 fwd = normalized(target - eye);
    const Vec3 up{0.0, 0.0, 1.0};
    const Vec3 x = normalized(cross(fwd, up));
    const Vec3 y = cross(fwd, x);  // unit: fwd and x are orthonormal
    CameraPose pose;
    pose.rotation.m[0] = {x.x, x.y, x.z};
    pose.rotation.m[1] = {y.x, y.y, y.z};
    pose.rotation.m[2] = {fwd.x, fwd.y, fwd.z};
    pose.translation = -(pose.rotation * eye);
    return pose;
}

// Periodic piecewise-linear interpolation of keys placed uniformly on [0,1).
double interp_keys_periodic(const std::vector<double>& keys, double u) {
    const int k = static_cast<int>(keys.size());
    const double s = (u - std::floor(u)) * k;
    const int i = std::min(static_cast<int>(s), k - 1);
    const double t = s - i;
    return (1.0 - t) * keys[i] + t * keys[(i + 1) % k];
}

}  // namespace

std::vector<std::pair<CameraPose, CameraIntrinsics>> sample_trajectory(
    const TrajectoryParams& params, Vec3 lookat_center) {
    if (params.d_min >= params.d_max) throw ArgumentError("sample_trajectory: d_min >= d_max");
    if (params.waypoints < params.k1_elevations * params.k2_radii)
        throw ArgumentError("sample_trajectory: waypoints < k1*k2");
    if (params.frame_count < 1) throw ArgumentError("sample_trajectory: frame_count < 1");

    Rng rng(params.seed);
    std::vector<double> elev_keys(params.k1_elevations);
    for (auto& e : elev_keys) e = rng.uniform(-kElevationRange, kElevationRange);
    std::vector<double> radius_keys(params.k2_radii);
    for (auto& r : radius_keys) r = rng.uniform(params.d_min, params.d_max);
    const double focal_mm = params.focal_set_mm[rng.uniform_int(
        static_cast<int>(params.focal_set_mm.size()))];

    std::vector<Vec3> waypoints(params.waypoints);
    for (int i = 0; i < params.waypoints; ++i) {
        const double u = static_cast<double>(i) / params.waypoints;
        const double az = 2.0 * kPi * u;
        const double elev = interp_keys_periodic(elev_keys, u);
        const double radius = interp_keys_periodic(radius_keys, u);
        const double ce = std::cos(elev);
        waypoints[i] = lookat_center +
                       radius * Vec3{ce * std::cos(az), ce * std::sin(az), std::sin(elev)};
    }

    PeriodicSpline spline(waypoints);
    const CameraIntrinsics intrinsics =
        CameraIntrinsics::from_focal_mm(focal_mm, params.width, params.height);

    std::vector<std::pair<CameraPose, CameraIntrinsics>> out;
    out.reserve(params.frame_count);
    for (int i = 0; i < params.frame_count; ++i) {
        const Vec3 eye = spline.eval(static_cast<double>(i) / params.frame_count);
        const Vec3 jitter{rng.uniform(-params.jitter, params.jitter),
                          rng.uniform(-params.jitter, params.jitter),
                          rng.uniform(-params.jitter, params.jitter)};
        out.emplace_back(look_at(eye, lookat_center + jitter), intrinsics);
    }
    return out;
}

ObjectKind object_kind_from_string(const std::string& name) {
    if (name == "sphere") return ObjectKind::sphere;
    if (name == "box") return ObjectKind::box;
    if (name == "torus") return ObjectKind::torus;
    if (name == "composite") return ObjectKind::composite;
    throw ArgumentError("unknown object kind '" + name + "'");
}

namespace {

Vec3 procedural_color(Vec3 p, const Vec3 freq[3], const Vec3 phase) {
    return {0.5 + 0.45 * std::sin(dot(freq[0], p) + phase.x),
            0.5 + 0.45 * std::sin(dot(freq[1], p) + phase.y),
            0.5 + 0.45 * std::sin(dot(freq[2], p) + phase.z)};
}

struct SurfaceSample {
    Vec3 position;
    double area;  // total surface area of the shape, for spacing
};

Vec3 sample_sphere(Rng& rng, double radius) {
    return radius * rng.unit_vector();
}

Vec3 sample_box(Rng& rng, double half) {
    const int face = rng.uniform_int(6);
    const double u = rng.uniform(-half, half);
    const double v = rng.uniform(-half, half);
    const double s = (face % 2 == 0) ? half : -half;
    switch (face / 2) {
        case 0: return {s, u, v};
        case 1: return {u, s, v};
        default: return {u, v, s};
    }
}

Vec3 sample_torus(Rng& rng, double major, double minor) {
    while (true) {
        const double u = rng.uniform(0.0, 2.0 * kPi);
        const double v = rng.uniform(0.0, 2.0 * kPi);
        // area element weight (major + minor cos v) / (major + minor)
        if (rng.uniform() > (major + minor * std::cos(v)) / (major + minor)) continue;
        const double ring = major + minor * std::cos(v);
        return {ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)};
    }
}

}  // namespace

GaussianField make_object(ObjectKind kind, uint64_t seed, int count) {
    if (count < 1) throw ArgumentError("make_object: count must be >= 1");
    Rng rng(seed);

    Vec3 freq[3];
    for (auto& f : freq) f = {rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0)};
    const Vec3 phase{rng.uniform(0.0, 2.0 * kPi), rng.uniform(0.0, 2.0 * kPi),
                     rng.uniform(0.0, 2.0 * kPi)};

    constexpr double kSphereRadius = 1.0;
    constexpr double kBoxHalf = 0.7;
    constexpr double kTorusMajor = 0.8, kTorusMinor = 0.3;

    GaussianField field;
    field.primitives.reserve(count);
    for (int i = 0; i < count; ++i) {
        SurfaceSample s{};
        switch (kind) {
            case ObjectKind::sphere:
                s = {sample_sphere(rng, kSphereRadius), 4.0 * kPi * kSphereRadius * kSphereRadius};
                break;
            case ObjectKind::box:
                s = {sample_box(rng, kBoxHalf), 24.0 * kBoxHalf * kBoxHalf};
                break;
            case ObjectKind::torus:
                s = {sample_torus(rng, kTorusMajor, kTorusMinor),
                     4.0 * kPi * kPi * kTorusMajor * kTorusMinor};
                break;
            case ObjectKind::composite: {
                // Smaller sphere, box, and torus side by side.
                const int part = rng.uniform_int(3);
                if (part == 0)
                    s = {0.55 * sample_sphere(rng, 1.0) + Vec3{0.0, 0.0, 0.55},
                         4.0 * kPi * 0.55 * 0.55};
                else if (part == 1)
                    s = {sample_box(rng, 0.4) + Vec3{0.0, 0.0, -0.5}, 24.0 * 0.4 * 0.4};
                else
                    s = {sample_torus(rng, 0.55, 0.18), 4.0 * kPi * kPi * 0.55 * 0.18};
                break;
            }
        }
        const double spacing = std::sqrt(s.area / count);
        // 0.8x spacing keeps the surface watertight: grazing transmittance
        // decays before rays reach the far side, which keeps the expected
        // depth on the near surface.
        const double sc = 0.8 * spacing;
        field.push_back(GaussianPrimitive::make(s.position, Quatf{}, {sc, sc, sc},
                                                procedural_color(s.position, freq, phase),
                                                rng.uniform(0.7, 1.0)),
                        Subgroup::src);
    }
    return field;
}

std::vector<FrameObservation> render_sequence(
    const GaussianField& object,
    const std::vector<std::pair<CameraPose, CameraIntrinsics>>& trajectory,
    const RenderSettings& settings) {
    if (trajectory.empty()) throw ArgumentError("render_sequence: empty trajectory");
    std::vector<FrameObservation> frames;
    frames.reserve(trajectory.size());
    for (size_t i = 0; i < trajectory.size(); ++i) {
        RenderSettings s = settings;
        s.width = trajectory[i].second.width;
        s.height = trajectory[i].second.height;
        RenderOutput out = render(object, trajectory[i].first, trajectory[i].second, s);
        FrameObservation frame;
        frame.mask = mask_from_alpha(out, 0.5);
        frame.rgb = std::move(out.color);
        frame.depth = std::move(out.depth);
        frame.t = static_cast<int>(i);
        frames.push_back(std::move(frame));
    }
    return frames;
}

int curriculum_gap_max(double progress, int sequence_len) {
    progress = std::min(1.0, std::max(0.0, progress));
    return std::max(1, static_cast<int>(std::lround(1.0 + progress * (sequence_len - 1))));
}

std::vector<int> curriculum_sampler(double progress, int sequence_len, int views_needed,
                                    uint64_t seed) {
    if (views_needed > sequence_len)
        throw ArgumentError("curriculum_sampler: views_needed > sequence_len");
    if (views_needed < 1) throw ArgumentError("curriculum_sampler: views_needed < 1");

    const int gap_max = curriculum_gap_max(progress, sequence_len);
    Rng rng(seed);
    std::vector<int> indices(views_needed);

    if (gap_max >= sequence_len - 1) {
        // Unconstrained: uniform distinct indices via partial shuffle.
        std::vector<int> all(sequence_len);
        for (int i = 0; i < sequence_len; ++i) all[i] = i;
        for (int i = 0; i < views_needed; ++i)
            std::swap(all[i], all[i + rng.uniform_int(sequence_len - i)]);
        std::copy(all.begin(), all.begin() + views_needed, indices.begin());
        std::sort(indices.begin(), indices.end());
        return indices;
    }

    // Window placement plus bounded gaps.
    const int window = std::min(sequence_len, (views_needed - 1) * gap_max + 1);
    const int start_max = sequence_len - window;
    while (true) {
        int span = 0;
        std::vector<int> gaps(views_needed - 1);
        for (auto& g : gaps) {
            g = 1 + rng.uniform_int(gap_max);
            span += g;
        }
        if (span > window - 1) continue;  // rare, resample
        int idx = start_max > 0 ? rng.uniform_int(start_max + 1) : 0;
        indices[0] = idx;
        for (int i = 1; i < views_needed; ++i) {
            idx += gaps[i - 1];
            indices[i] = idx;
        }
        return indices;
    }
}

}  // namespace streamsplat
