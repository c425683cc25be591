// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "anchorkv/common.hpp"
#include "anchorkv/memory.hpp"
#include "anchorkv/rope.hpp"
#include "anchorkv/schedule.hpp"

namespace anchorkv {

struct ModelConfig {
    int d_model = 32;
    int n_heads = 4;
    int tokens_per_frame = 4;
    std::uint64_t weight_seed = 0;

    int head_dim() const noexcept { return n_heads > 0 ? d_model / n_heads : 0; }
    void validate() const;
};

/**
 * Single-block causal attention generator with prompt conditioning by additive bias.
 * Weights are N(0, 1/d_model) draws from `weight_seed`; immutable after construction.
 */
class ToyModel {
public:
    explicit ToyModel(const ModelConfig& cfg);

    const ModelConfig& config() const noexcept { return cfg_; }
    const Matrix& w_q() const noexcept { return w_q_; }
    const Matrix& w_k() const noexcept { return w_k_; }
    const Matrix& w_v() const noexcept { return w_v_; }
    const Matrix& w_o() const noexcept { return w_o_; }
    const Matrix& w_mlp() const noexcept { return w_mlp_; }

    /// Throws DimensionError unless `latent` is tokens_per_frame x d_model.
    void check_latent(const Matrix& latent) const;
    void check_prompt(const PromptEmbedding& prompt) const;

private:
    ModelConfig cfg_;
    Matrix w_q_;
    Matrix w_k_;
    Matrix w_v_;
    Matrix w_o_;
    Matrix w_mlp_;
};

/// `latent` with the prompt vector added to every token row.
Matrix condition(const Matrix& latent, const PromptEmbedding& prompt);

/// Unrotated keys and values of `latent` under `prompt`. Frame and segment are left to the caller.
KVEntry compute_kv(const ToyModel& model, const Matrix& latent, const PromptEmbedding& prompt);

/**
 * Attention of the query frame over `mem` plus its own tokens (at the query position),
 * followed by the output projection, a tanh MLP residual and per-token RMS normalisation.
 * Softmax is accumulated block by block over cached frames.
 */
Matrix attend(const ToyModel& model, const Matrix& query_latent, const PromptEmbedding& prompt,
              const AnchorMemoryView& mem, const PositionMap& pmap, const RopeConfig& rope);

/// Output stage shared by `attend`: residual, MLP and RMS normalisation of the attention mix.
Matrix finish_block(const ToyModel& model, const Matrix& query_latent, const Matrix& mixed_heads);

/// Standard-normal latent for frame `t`; depends only on (t, noise_seed, shape).
Matrix seeded_noise(const ModelConfig& cfg, int t, std::uint64_t noise_seed);

struct GeneratedFrame {
    Matrix latent;
    KVEntry kv;
};

GeneratedFrame generate_frame(const ToyModel& model, const AnchorMemoryView& mem, const PositionMap& pmap,
                              const PromptEmbedding& prompt, int segment, int t, std::uint64_t noise_seed,
                              const RopeConfig& rope);

}  // namespace anchorkv
