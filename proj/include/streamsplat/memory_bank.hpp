// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamsplat/geometry.hpp"

namespace streamsplat {

// One memory entry: dual key (latent + shared per-view direction), value, and
// the usage bookkeeping that drives sparsification.
struct MemoryToken {
    std::vector<double> latent_key;  // C
    Vec3 direction_key{};            // unit
    std::vector<double> value;       // C
    double usage_sum = 0.0;          // accumulated per-timestep attention mass
    int read_count = 0;              // timesteps this token participated in
    int birth_t = 0;
    uint64_t id = 0;

    // usage_sum / read_count; 0 for a never-read token.
    double usage() const { return read_count > 0 ? usage_sum / read_count : 0.0; }
};

// Result of one dual read: both feature blocks plus the attention maps kept
// for usage accounting. Rows are query tokens, columns are bank tokens.
struct ReadoutResult {
    MatX aligned;             // P x C
    MatX complementary;       // P x C
    MatX attention_aligned;   // P x n
    MatX attention_comp;      // P x n
};

// Converts (azimuth, polar) to the unit direction key.
Vec3 direction_key_from_angles(double theta, double phi);

// Normalized average of the reference and current direction keys; falls back
// to k0 when the pair is antipodal.
Vec3 direction_query(Vec3 k0, Vec3 kt);

// tau = 2.5 - sigma, sigma clamped into [0,1].
double temperature(double sigma);

// Scoring mode: dual multiplies the latent dot by the (signed) directional
// dot; latent_only replaces the directional factor with 1 (ablation).
enum class ScoreMode { dual, latent_only };

class MemoryBank {
public:
    MemoryBank(int feature_dim, int tokens_per_view, int capacity_tokens)
        : feature_dim_(feature_dim),
          tokens_per_view_(tokens_per_view),
          capacity_tokens_(capacity_tokens) {}

    int feature_dim() const { return feature_dim_; }
    int tokens_per_view() const { return tokens_per_view_; }
    int capacity_tokens() const { return capacity_tokens_; }
    size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    const std::vector<MemoryToken>& tokens() const { return tokens_; }

    // s[p][i] = (qL[p] . kL_i) * (qD . kD_i) / tau. Throws EmptyBankError on
    // an empty bank, ArgumentError on tau <= 0 or a feature-dim mismatch.
    MatX aligned_scores(const MatX& latent_query, Vec3 direction_query, double tau,
                        ScoreMode mode = ScoreMode::dual) const;

    // As aligned_scores with the directional factor negated.
    MatX complementary_scores(const MatX& latent_query, Vec3 direction_query, double tau,
                              ScoreMode mode = ScoreMode::dual) const;

    // Both attention reads; does not touch usage counters.
    ReadoutResult read_detached(const MatX& latent_query, Vec3 ref_direction,
                                Vec3 cur_direction, double sigma,
                                ScoreMode mode = ScoreMode::dual) const;

    // Folds one read's attention maps into usage_sum/read_count. Each token
    // accrues the mean attention mass over query tokens, aligned + comp.
    void accumulate_usage(const ReadoutResult& readout);

    // read_detached + accumulate_usage: the standard read.
    ReadoutResult read(const MatX& latent_query, Vec3 ref_direction, Vec3 cur_direction,
                       double sigma, ScoreMode mode = ScoreMode::dual);

    // Appends P tokens sharing direction_key, sparsifying first whenever the
    // append would exceed capacity. latent_keys/values are P x C.
    void write(const MatX& latent_keys, Vec3 direction_key, const MatX& values, int t);

    // Mean directional dot product of token i against all others. Throws
    // UndefinedCoverageError when the bank holds fewer than two tokens.
    double coverage(size_t index) const;

    // Drops exactly ceil(0.2 * n) tokens: the lowest-usage entries of the
    // top-half-by-coverage dense subset (40th-percentile usage cut, ties
    // broken by usage, then birth_t, then id). Returns the removed ids.
    std::vector<uint64_t> sparsify();

    void snapshot(const std::string& path) const;
    static MemoryBank restore(const std::string& path);

private:
    int feature_dim_;
    int tokens_per_view_;
    int capacity_tokens_;
    uint64_t next_id_ = 0;
    std::vector<MemoryToken> tokens_;

    MatX scores(const MatX& latent_query, Vec3 direction_query, double tau, double dir_sign,
                ScoreMode mode) const;
};

}  // namespace streamsplat
