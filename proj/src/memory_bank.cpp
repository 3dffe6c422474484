// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "streamsplat/memory_bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "streamsplat/errors.hpp"

namespace streamsplat {

Vec3 direction_key_from_angles(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi))
        throw ArgumentError("direction_key_from_angles: non-finite angle");
    const double sp = std::sin(phi);
    return {sp * std::cos(theta), sp * std::sin(theta), std::cos(phi)};
}

Vec3 direction_query(Vec3 k0, Vec3 kt) {
    if (std::abs(norm(k0) - 1.0) > 1e-3 || std::abs(norm(kt) - 1.0) > 1e-3)
        throw ArgumentError("direction_query: inputs must be unit vectors");
    const Vec3 sum = k0 + kt;
    const double n = norm(sum);
    if (n < 1e-6) return k0;  // antipodal fallback
    return sum / n;
}

double temperature(double sigma) {
    if (sigma < 0.0 || sigma > 1.0) {
        std::cerr << "temperature: sigma " << sigma << " outside [0,1], clamping\n";
        sigma = std::min(1.0, std::max(0.0, sigma));
    }
    return 2.5 - sigma;
}

MatX MemoryBank::scores(const MatX& latent_query, Vec3 dir_query, double tau, double dir_sign,
                        ScoreMode mode) const {
    if (tokens_.empty()) throw EmptyBankError("memory read on empty bank");
    if (!(tau > 0.0)) throw ArgumentError("scores: tau must be > 0");
    if (latent_query.cols != feature_dim_)
        throw ArgumentError("scores: latent query feature dim mismatch");

    const int p_count = latent_query.rows;
    const int n = static_cast<int>(tokens_.size());
    MatX s(p_count, n);
    const double inv_tau = 1.0 / tau;
    for (int i = 0; i < n; ++i) {
        const MemoryToken& tok = tokens_[i];
        const double dir_factor =
            mode == ScoreMode::latent_only ? 1.0 : dir_sign * dot(dir_query, tok.direction_key);
        for (int p = 0; p < p_count; ++p) {
            const double* q = latent_query.row_ptr(p);
            double latent = 0.0;
            for (int c = 0; c < feature_dim_; ++c) latent += q[c] * tok.latent_key[c];
            s.at(p, i) = latent * dir_factor * inv_tau;
        }
    }
    return s;
}

MatX MemoryBank::aligned_scores(const MatX& latent_query, Vec3 dir_query, double tau,
                                ScoreMode mode) const {
    return scores(latent_query, dir_query, tau, 1.0, mode);
}

MatX MemoryBank::complementary_scores(const MatX& latent_query, Vec3 dir_query, double tau,
                                      ScoreMode mode) const {
    return scores(latent_query, dir_query, tau, -1.0, mode);
}

namespace {

// Row-wise softmax, max-shifted.
void softmax_rows(MatX& m) {
    for (int p = 0; p < m.rows; ++p) {
        double* row = m.row_ptr(p);
        double mx = row[0];
        for (int i = 1; i < m.cols; ++i) mx = std::max(mx, row[i]);
        double sum = 0.0;
        for (int i = 0; i < m.cols; ++i) {
            row[i] = std::exp(row[i] - mx);
            sum += row[i];
        }
        for (int i = 0; i < m.cols; ++i) row[i] /= sum;
    }
}

}  // namespace

ReadoutResult MemoryBank::read_detached(const MatX& latent_query, Vec3 ref_direction,
                                        Vec3 cur_direction, double sigma, ScoreMode mode) const {
    const Vec3 q_dir = direction_query(ref_direction, cur_direction);
    const double tau = temperature(sigma);

    ReadoutResult out;
    out.attention_aligned = aligned_scores(latent_query, q_dir, tau, mode);
    out.attention_comp = complementary_scores(latent_query, q_dir, tau, mode);
    softmax_rows(out.attention_aligned);
    softmax_rows(out.attention_comp);

    const int p_count = latent_query.rows;
    const int n = static_cast<int>(tokens_.size());
    out.aligned = MatX(p_count, feature_dim_);
    out.complementary = MatX(p_count, feature_dim_);
    for (int p = 0; p < p_count; ++p) {
        double* acc_a = out.aligned.row_ptr(p);
        double* acc_c = out.complementary.row_ptr(p);
        const double* wa = out.attention_aligned.row_ptr(p);
        const double* wc = out.attention_comp.row_ptr(p);
        for (int i = 0; i < n; ++i) {
            const double* v = tokens_[i].value.data();
            for (int c = 0; c < feature_dim_; ++c) {
                acc_a[c] += wa[i] * v[c];
                acc_c[c] += wc[i] * v[c];
            }
        }
    }
    return out;
}

void MemoryBank::accumulate_usage(const ReadoutResult& readout) {
    const int n = readout.attention_aligned.cols;
    const int p_count = readout.attention_aligned.rows;
    if (n != static_cast<int>(tokens_.size()))
        throw ArgumentError("accumulate_usage: readout does not match bank size");
    for (int i = 0; i < n; ++i) {
        double mass = 0.0;
        for (int p = 0; p < p_count; ++p)
            mass += readout.attention_aligned.at(p, i) + readout.attention_comp.at(p, i);
        tokens_[i].usage_sum += mass / p_count;
        tokens_[i].read_count += 1;
    }
}

ReadoutResult MemoryBank::read(const MatX& latent_query, Vec3 ref_direction, Vec3 cur_direction,
                               double sigma, ScoreMode mode) {
    ReadoutResult out = read_detached(latent_query, ref_direction, cur_direction, sigma, mode);
    accumulate_usage(out);
    return out;
}

void MemoryBank::write(const MatX& latent_keys, Vec3 direction_key, const MatX& values, int t) {
    if (latent_keys.rows != tokens_per_view_ || values.rows != tokens_per_view_)
        throw ArgumentError("write: expected exactly P key/value rows");
    if (latent_keys.cols != feature_dim_ || values.cols != feature_dim_)
        throw ArgumentError("write: feature dim mismatch");
    if (std::abs(norm(direction_key) - 1.0) > 1e-3)
        throw ArgumentError("write: direction key must be unit");

    while (static_cast<int>(tokens_.size()) + tokens_per_view_ > capacity_tokens_) sparsify();

    for (int p = 0; p < tokens_per_view_; ++p) {
        MemoryToken tok;
        tok.latent_key.assign(latent_keys.row_ptr(p), latent_keys.row_ptr(p) + feature_dim_);
        tok.value.assign(values.row_ptr(p), values.row_ptr(p) + feature_dim_);
        tok.direction_key = direction_key;
        tok.birth_t = t;
        tok.id = next_id_++;
        tokens_.push_back(std::move(tok));
    }
}

double MemoryBank::coverage(size_t index) const {
    const size_t n = tokens_.size();
    if (n < 2) throw UndefinedCoverageError("coverage undefined for banks of fewer than 2 tokens");
    const Vec3 ki = tokens_[index].direction_key;
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
        if (j == index) continue;
        sum += dot(ki, tokens_[j].direction_key);
    }
    return sum / static_cast<double>(n - 1);
}

std::vector<uint64_t> MemoryBank::sparsify() {
    const size_t n = tokens_.size();
    if (n < 2) return {};

    struct Entry {
        double cov;
        double usage;
        int birth_t;
        uint64_t id;
        size_t index;
    };
    std::vector<Entry> entries;
    entries.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& tok = tokens_[i];
        entries.push_back({coverage(i), tok.usage(), tok.birth_t, tok.id, i});
    }

    // Dense subset: top half by coverage; equal coverage admits low-usage
    // tokens first so they stay eligible for pruning.
    const size_t dense_count = (n + 1) / 2;
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.cov != b.cov) return a.cov > b.cov;
        if (a.usage != b.usage) return a.usage < b.usage;
        if (a.birth_t != b.birth_t) return a.birth_t < b.birth_t;
        return a.id < b.id;
    });
    entries.resize(dense_count);

    // Order the dense subset for removal: lowest usage first, then oldest.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.usage != b.usage) return a.usage < b.usage;
        if (a.birth_t != b.birth_t) return a.birth_t < b.birth_t;
        return a.id < b.id;
    });

    const size_t remove_count = std::min(dense_count, (n + 4) / 5);  // ceil(0.2 n)
    std::vector<bool> remove(n, false);
    std::vector<uint64_t> removed_ids;
    removed_ids.reserve(remove_count);
    for (size_t k = 0; k < remove_count; ++k) {
        remove[entries[k].index] = true;
        removed_ids.push_back(entries[k].id);
    }

    std::vector<MemoryToken> kept;
    kept.reserve(n - remove_count);
    for (size_t i = 0; i < n; ++i)
        if (!remove[i]) kept.push_back(std::move(tokens_[i]));
    tokens_ = std::move(kept);
    return removed_ids;
}

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, size_t& offset) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (static_cast<size_t>(in.gcount()) != sizeof(T))
        throw FormatError("truncated bank snapshot", offset + in.gcount());
    offset += sizeof(T);
    return v;
}

constexpr char kBankMagic[8] = {'S', 'S', 'P', 'M', 'B', 'N', 'K', '1'};

}  // namespace

void MemoryBank::snapshot(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("snapshot: cannot open " + path);
    out.write(kBankMagic, sizeof(kBankMagic));
    write_raw<uint32_t>(out, static_cast<uint32_t>(feature_dim_));
    write_raw<uint32_t>(out, static_cast<uint32_t>(tokens_per_view_));
    write_raw<uint32_t>(out, static_cast<uint32_t>(capacity_tokens_));
    write_raw<uint32_t>(out, static_cast<uint32_t>(tokens_.size()));
    write_raw<uint64_t>(out, next_id_);
    for (const auto& tok : tokens_) {
        write_raw<uint64_t>(out, tok.id);
        write_raw<int32_t>(out, tok.birth_t);
        write_raw<int32_t>(out, tok.read_count);
        write_raw<double>(out, tok.usage_sum);
        for (double v : {tok.direction_key.x, tok.direction_key.y, tok.direction_key.z})
            write_raw<float>(out, static_cast<float>(v));
        for (double v : tok.latent_key) write_raw<float>(out, static_cast<float>(v));
        for (double v : tok.value) write_raw<float>(out, static_cast<float>(v));
    }
    if (!out) throw ArgumentError("snapshot: write failed for " + path);
}

MemoryBank MemoryBank::restore(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("restore: cannot open " + path);
    size_t offset = 0;
    char magic[8];
    in.read(magic, sizeof(magic));
    if (static_cast<size_t>(in.gcount()) != sizeof(magic) ||
        std::memcmp(magic, kBankMagic, sizeof(magic)) != 0)
        throw FormatError("bad bank snapshot magic", 0);
    offset += sizeof(magic);

    const auto c = read_raw<uint32_t>(in, offset);
    const auto p = read_raw<uint32_t>(in, offset);
    const auto cap = read_raw<uint32_t>(in, offset);
    const auto count = read_raw<uint32_t>(in, offset);
    const auto next_id = read_raw<uint64_t>(in, offset);

    MemoryBank bank(static_cast<int>(c), static_cast<int>(p), static_cast<int>(cap));
    bank.next_id_ = next_id;
    bank.tokens_.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        MemoryToken tok;
        tok.id = read_raw<uint64_t>(in, offset);
        tok.birth_t = read_raw<int32_t>(in, offset);
        tok.read_count = read_raw<int32_t>(in, offset);
        tok.usage_sum = read_raw<double>(in, offset);
        Vec3 dir;
        dir.x = read_raw<float>(in, offset);
        dir.y = read_raw<float>(in, offset);
        dir.z = read_raw<float>(in, offset);
        tok.direction_key = normalized(dir);  // f32 round trip loses the 1e-9 unit norm
        tok.latent_key.resize(c);
        for (auto& v : tok.latent_key) v = read_raw<float>(in, offset);
        tok.value.resize(c);
        for (auto& v : tok.value) v = read_raw<float>(in, offset);
        bank.tokens_.push_back(std::move(tok));
    }
    return bank;
}

}  // namespace streamsplat
