// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/encoders.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "streamsplat/errors.hpp"
#include "streamsplat/random.hpp"

namespace streamsplat {

namespace {

// Fixed random projection matrices, keyed by (in_dim, out_dim, stream). The
// seeds are constants: every build produces the same feature maps.
const MatX& fixed_projection(int in_dim, int out_dim, uint64_t stream) {
    static std::mutex mu;
    static std::unordered_map<uint64_t, MatX> cache;
    const uint64_t key = mix_seed(mix_seed(stream, in_dim), out_dim);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Rng rng(mix_seed(0x5eedfacedULL, key));
    MatX m(in_dim, out_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (auto& v : m.data) v = rng.normal() * scale;
    return cache.emplace(key, std::move(m)).first->second;
}

void project_into(const double* descriptor, int in_dim, double* out, int out_dim,
                  uint64_t stream) {
    const MatX& proj = fixed_projection(in_dim, out_dim, stream);
    for (int c = 0; c < out_dim; ++c) out[c] = 0.0;
    for (int d = 0; d < in_dim; ++d) {
        const double x = descriptor[d];
        if (x == 0.0) continue;
        const double* row = proj.row_ptr(d);
        for (int c = 0; c < out_dim; ++c) out[c] += x * row[c];
    }
}

constexpr uint64_t kLatentStream = 1;
constexpr uint64_t kValueStream = 2;

}  // namespace

MatX latent_key_stub(const FrameObservation& frame, int patch_size, int feature_dim,
                     double latent_scale) {
    const int h = frame.rgb.height, w = frame.rgb.width;
    if (patch_size < 1 || h % patch_size != 0 || w % patch_size != 0)
        throw ArgumentError("latent_key_stub: image size not divisible by patch size");
    if (feature_dim < kMinFeatureDim) throw ArgumentError("latent_key_stub: feature_dim too small");
    if (frame.mask.height != h || frame.mask.width != w)
        throw ArgumentError("latent_key_stub: mask shape mismatch");

    const int rows = h / patch_size, cols = w / patch_size;
    MatX keys(rows * cols, feature_dim);
    const double n_px = static_cast<double>(patch_size) * patch_size;

    for (int pr = 0; pr < rows; ++pr)
        for (int pc = 0; pc < cols; ++pc) {
            double sum[3] = {0, 0, 0}, sum_sq[3] = {0, 0, 0};
            double covered = 0.0;
            for (int dy = 0; dy < patch_size; ++dy)
                for (int dx = 0; dx < patch_size; ++dx) {
                    const int row = pr * patch_size + dy, col = pc * patch_size + dx;
                    const float* px = frame.rgb.px(row, col);
                    for (int c = 0; c < 3; ++c) {
                        sum[c] += px[c];
                        sum_sq[c] += double(px[c]) * px[c];
                    }
                    covered += frame.mask.at(row, col) ? 1.0 : 0.0;
                }
            double descriptor[10];
            for (int c = 0; c < 3; ++c) {
                const double mean = sum[c] / n_px;
                descriptor[c] = mean;
                descriptor[3 + c] = std::sqrt(std::max(0.0, sum_sq[c] / n_px - mean * mean));
            }
            descriptor[6] = (pc + 0.5) / cols;  // normalized patch center
            descriptor[7] = (pr + 0.5) / rows;
            descriptor[8] = covered / n_px;
            descriptor[9] = 1.0;  // keeps proportional descriptors distinct after normalization

            const int p = pr * cols + pc;
            project_into(descriptor, 10, keys.row_ptr(p), feature_dim, kLatentStream);
            double nrm = 0.0;
            for (int c = 0; c < feature_dim; ++c) nrm += keys.at(p, c) * keys.at(p, c);
            nrm = std::sqrt(nrm);
            if (nrm > 1e-12) {
                const double g = latent_scale / nrm;
                for (int c = 0; c < feature_dim; ++c) keys.at(p, c) *= g;
            }
        }
    return keys;
}

DirectionEstimate direction_oracle(const CameraPose& gt_relative_pose, double noise_deg,
                                   uint64_t seed) {
    // Canonical object forward axis (+Z) expressed in the camera frame.
    Vec3 axis = gt_relative_pose.rotation.col(2);
    axis = normalized(axis);

    if (noise_deg > 0.0) {
        Rng rng(seed);
        const double angle = rng.uniform(0.0, noise_deg * 3.14159265358979323846 / 180.0);
        // Random axis perpendicular to the direction, then Rodrigues.
        Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        const Vec3 e1 = normalized(cross(axis, helper));
        const Vec3 e2 = cross(axis, e1);
        const double psi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const Vec3 k = std::cos(psi) * e1 + std::sin(psi) * e2;
        axis = std::cos(angle) * axis + std::sin(angle) * cross(k, axis) +
               (1.0 - std::cos(angle)) * dot(k, axis) * k;
        axis = normalized(axis);
    }

    DirectionEstimate est;
    est.phi = std::acos(std::min(1.0, std::max(-1.0, axis.z)));
    est.theta = std::atan2(axis.y, axis.x);
    if (axis.x == 0.0 && axis.y == 0.0) est.theta = 0.0;
    est.gamma = 0.0;
    est.sigma = std::min(1.0, std::max(0.0, 1.0 - noise_deg / 90.0));
    return est;
}

ValueEncoding value_stub(const FrameObservation& frame, const CameraPose& pose,
                         const CameraIntrinsics& intrinsics, int patch_size, int feature_dim) {
    if (!frame.depth) throw UnsupportedInputError("value_stub: frame carries no depth");
    const int h = frame.rgb.height, w = frame.rgb.width;
    if (patch_size < 1 || h % patch_size != 0 || w % patch_size != 0)
        throw ArgumentError("value_stub: image size not divisible by patch size");
    if (feature_dim < kMinFeatureDim) throw ArgumentError("value_stub: feature_dim too small");

    const int rows = h / patch_size, cols = w / patch_size;
    const Mat3 rot_t = transpose(pose.rotation);
    const double n_px = static_cast<double>(patch_size) * patch_size;

    ValueEncoding out;
    out.values = MatX(rows * cols, feature_dim);
    out.summaries.resize(static_cast<size_t>(rows) * cols);

    for (int pr = 0; pr < rows; ++pr)
        for (int pc = 0; pc < cols; ++pc) {
            Vec3 centroid{}, color{};
            double depth_sum = 0.0;
            int count = 0;
            for (int dy = 0; dy < patch_size; ++dy)
                for (int dx = 0; dx < patch_size; ++dx) {
                    const int row = pr * patch_size + dy, col = pc * patch_size + dx;
                    if (!frame.mask.at(row, col)) continue;
                    const double d = frame.depth->at(row, col);
                    const Vec3 cam{(col + 0.5 - intrinsics.cx) / intrinsics.fx * d,
                                   (row + 0.5 - intrinsics.cy) / intrinsics.fy * d, d};
                    centroid += rot_t * (cam - pose.translation);
                    color += frame.rgb.rgb(row, col).d();
                    depth_sum += d;
                    ++count;
                }
            PatchSummary summary;
            if (count > 0) {
                summary.centroid = centroid / count;
                summary.color = color / count;
                summary.coverage = count / n_px;
                summary.mean_depth = depth_sum / count;
            }
            const int p = pr * cols + pc;
            out.summaries[p] = summary;

            double raw[kSummaryDims] = {summary.centroid.x, summary.centroid.y,
                                        summary.centroid.z, summary.color.x,
                                        summary.color.y,    summary.color.z,
                                        summary.coverage,   summary.mean_depth};
            double* value = out.values.row_ptr(p);
            for (int c = 0; c < kSummaryDims; ++c) value[c] = raw[c];
            project_into(raw, kSummaryDims, value + kSummaryDims, feature_dim - kSummaryDims,
                         kValueStream);
        }
    return out;
}

PatchSummary decode_value_summary(const double* value, int feature_dim) {
    if (feature_dim < kMinFeatureDim)
        throw ArgumentError("decode_value_summary: feature_dim too small");
    PatchSummary s;
    s.centroid = {value[0], value[1], value[2]};
    s.color = {value[3], value[4], value[5]};
    s.coverage = value[6];
    s.mean_depth = value[7];
    return s;
}

}  // namespace streamsplat
