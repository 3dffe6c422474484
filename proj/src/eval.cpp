// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "streamsplat/errors.hpp"
#include "streamsplat/random.hpp"

namespace streamsplat {

double psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width) throw ArgumentError("psnr: shape mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = double(a.data[i]) - double(b.data[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.data.size());
    if (mse == 0.0) return kPsnrSentinel;
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::vector<double> ssim_kernel() {
    std::vector<double> k(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Valid-mode separable convolution along rows then columns.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& kernel) {
    const int k = static_cast<int>(kernel.size());
    const int out_w = w - k + 1, out_h = h - k + 1;
    std::vector<double> tmp(static_cast<size_t>(h) * out_w);
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < out_w; ++col) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += kernel[i] * img[static_cast<size_t>(row) * w + col + i];
            tmp[static_cast<size_t>(row) * out_w + col] = acc;
        }
    std::vector<double> out(static_cast<size_t>(out_h) * out_w);
    for (int row = 0; row < out_h; ++row)
        for (int col = 0; col < out_w; ++col) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i)
                acc += kernel[i] * tmp[static_cast<size_t>(row + i) * out_w + col];
            out[static_cast<size_t>(row) * out_w + col] = acc;
        }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width) throw ArgumentError("ssim: shape mismatch");
    if (a.height < kSsimWindow || a.width < kSsimWindow)
        throw ArgumentError("ssim: image smaller than the 11x11 window");

    const auto kernel = ssim_kernel();
    const int h = a.height, w = a.width;
    const size_t n = static_cast<size_t>(h) * w;
    const double c1 = kSsimK1 * kSsimK1, c2 = kSsimK2 * kSsimK2;

    double total = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
        for (size_t i = 0; i < n; ++i) {
            const double xv = a.data[i * 3 + ch], yv = b.data[i * 3 + ch];
            x[i] = xv;
            y[i] = yv;
            xx[i] = xv * xv;
            yy[i] = yv * yv;
            xy[i] = xv * yv;
        }
        const auto mx = filter_valid(x, h, w, kernel);
        const auto my = filter_valid(y, h, w, kernel);
        const auto mxx = filter_valid(xx, h, w, kernel);
        const auto myy = filter_valid(yy, h, w, kernel);
        const auto mxy = filter_valid(xy, h, w, kernel);

        double acc = 0.0;
        for (size_t i = 0; i < mx.size(); ++i) {
            const double mu_x = mx[i], mu_y = my[i];
            const double var_x = mxx[i] - mu_x * mu_x;
            const double var_y = myy[i] - mu_y * mu_y;
            const double cov = mxy[i] - mu_x * mu_y;
            acc += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                   ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
        }
        total += acc / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

namespace {

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double m_avg(double psnr_db, double ssim_value) {
    return (clip01((psnr_db - 20.0) / 20.0) + ssim_value) / 2.0;
}

double m_avg(double psnr_db, double ssim_value, double lpips_value) {
    return (clip01((psnr_db - 20.0) / 20.0) + ssim_value + (1.0 - clip01(lpips_value / 0.6))) /
           3.0;
}

std::pair<std::vector<int>, std::vector<int>> split_input_target(int frame_count, uint64_t seed) {
    if (frame_count < 2) throw ArgumentError("split_input_target: need at least 2 frames");
    std::vector<int> ids(frame_count);
    for (int i = 0; i < frame_count; ++i) ids[i] = i;
    Rng rng(seed);
    for (int i = frame_count - 1; i > 0; --i) std::swap(ids[i], ids[rng.uniform_int(i + 1)]);

    const int input_count = (frame_count + 1) / 2;  // odd count: input gets the extra frame
    std::vector<int> input(ids.begin(), ids.begin() + input_count);
    std::vector<int> target(ids.begin() + input_count, ids.end());
    std::sort(input.begin(), input.end());
    std::sort(target.begin(), target.end());
    return {input, target};
}

namespace {

StageMetrics aggregate(const std::vector<EvalRow>& rows, int t_lo, int t_hi, bool lpips_present) {
    StageMetrics m;
    double lpips_sum = 0.0;
    for (const auto& row : rows) {
        if (row.t < t_lo || row.t > t_hi) continue;
        m.psnr += row.psnr;
        m.ssim += row.ssim;
        if (row.lpips) lpips_sum += *row.lpips;
        ++m.count;
    }
    if (m.count == 0) return m;
    m.psnr /= m.count;
    m.ssim /= m.count;
    if (lpips_present) {
        m.lpips = lpips_sum / m.count;
        m.m_avg = m_avg(m.psnr, m.ssim, *m.lpips);
    } else {
        m.m_avg = m_avg(m.psnr, m.ssim);
    }
    return m;
}

}  // namespace

StageReport run_protocol(StreamReconstructor& reconstructor,
                         const std::vector<FrameObservation>& frames,
                         const std::vector<CameraPose>& poses,
                         const std::vector<CameraIntrinsics>& intrinsics, uint64_t seed,
                         const RenderSettings& render_settings, const LpipsTable* lpips) {
    const int n = static_cast<int>(frames.size());
    if (n < 2) throw ArgumentError("run_protocol: need at least 2 frames");
    if (poses.size() != frames.size() || intrinsics.size() != frames.size())
        throw ArgumentError("run_protocol: frames/poses/intrinsics size mismatch");

    const auto [input_ids, target_ids] = split_input_target(n, seed);

    StageReport report;
    report.lpips_present = lpips != nullptr && !lpips->empty();

    try {
        reconstructor.init(frames[input_ids[0]], poses[input_ids[0]],
                           intrinsics[input_ids[0]]);
        for (size_t j = 1; j < input_ids.size(); ++j) {
            const int frame_id = input_ids[j];
            const int t = static_cast<int>(j);
            GaussianField field =
                reconstructor.step(frames[frame_id], poses[frame_id], intrinsics[frame_id]);
            for (int view : target_ids) {
                RenderSettings rs = render_settings;
                rs.width = intrinsics[view].width;
                rs.height = intrinsics[view].height;
                const RenderOutput out = render(field, poses[view], intrinsics[view], rs);
                EvalRow row;
                row.t = t;
                row.view = view;
                row.psnr = psnr(out.color, frames[view].rgb);
                row.ssim = ssim(out.color, frames[view].rgb);
                if (lpips) {
                    auto it = lpips->find({t, view});
                    if (it != lpips->end()) row.lpips = it->second;
                }
                report.rows.push_back(row);
            }
        }
    } catch (const std::exception& e) {
        report.error = e.what();
    }

    const int t_max = report.rows.empty() ? 0 : report.rows.back().t;
    const auto stage = [&](int lo, int hi) -> std::optional<StageMetrics> {
        StageMetrics m = aggregate(report.rows, lo, hi, report.lpips_present);
        if (m.count == 0) return std::nullopt;
        return m;
    };
    report.early = stage(1, 4);
    report.mid = stage(5, 10);
    report.late = stage(11, t_max);
    return report;
}

std::string StageReport::to_json() const {
    nlohmann::json j;
    j["lpips_present"] = lpips_present;
    const auto stage_json = [](const std::optional<StageMetrics>& m) -> nlohmann::json {
        if (!m) return nullptr;
        nlohmann::json s;
        s["psnr"] = m->psnr;
        s["ssim"] = m->ssim;
        if (m->lpips) s["lpips"] = *m->lpips;
        s["m_avg"] = m->m_avg;
        s["count"] = m->count;
        return s;
    };
    j["stages"]["early"] = stage_json(early);
    j["stages"]["mid"] = stage_json(mid);
    j["stages"]["late"] = stage_json(late);
    auto rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r;
        r["t"] = row.t;
        r["view"] = row.view;
        r["psnr"] = row.psnr;
        r["ssim"] = row.ssim;
        if (row.lpips) r["lpips"] = *row.lpips;
        rows_json.push_back(r);
    }
    j["rows"] = std::move(rows_json);
    if (error) j["error"] = *error;
    return j.dump(2);
}

std::string StageReport::to_csv() const {
    std::ostringstream out;
    out << "t,view,psnr,ssim,lpips\n";
    out.precision(10);
    for (const auto& row : rows) {
        out << row.t << ',' << row.view << ',' << row.psnr << ',' << row.ssim << ',';
        if (row.lpips) out << *row.lpips;
        out << '\n';
    }
    return out.str();
}

}  // namespace streamsplat
