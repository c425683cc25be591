// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "anchorkv/errors.hpp"

namespace anchorkv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Matrix random_weights(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix w(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) w(r, c) = normal(rng) * scale;
    }
    return w;
}

}  // namespace

void ModelConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || tokens_per_frame <= 0) {
        throw DimensionError("model dimensions must be positive");
    }
    if (d_model % n_heads != 0) throw DimensionError("d_model must be a multiple of n_heads");
    if (head_dim() % 2 != 0) throw DimensionError("head_dim must be even for rotary embedding");
}

ToyModel::ToyModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(splitmix64(cfg.weight_seed));
    w_q_ = random_weights(rng, cfg.d_model);
    w_k_ = random_weights(rng, cfg.d_model);
    w_v_ = random_weights(rng, cfg.d_model);
    w_o_ = random_weights(rng, cfg.d_model);
    w_mlp_ = random_weights(rng, cfg.d_model);
}

void ToyModel::check_latent(const Matrix& latent) const {
    if (latent.rows() != cfg_.tokens_per_frame || latent.cols() != cfg_.d_model) {
        throw DimensionError("latent must be " + std::to_string(cfg_.tokens_per_frame) + "x" +
                             std::to_string(cfg_.d_model) + ", got " + std::to_string(latent.rows()) + "x" +
                             std::to_string(latent.cols()));
    }
}

void ToyModel::check_prompt(const PromptEmbedding& prompt) const {
    if (prompt.vector.size() != cfg_.d_model) {
        throw DimensionError("prompt dimension " + std::to_string(prompt.vector.size()) + " != d_model " +
                             std::to_string(cfg_.d_model));
    }
}

Matrix condition(const Matrix& latent, const PromptEmbedding& prompt) {
    return latent.rowwise() + prompt.vector.transpose();
}

KVEntry compute_kv(const ToyModel& model, const Matrix& latent, const PromptEmbedding& prompt) {
    model.check_latent(latent);
    model.check_prompt(prompt);
    const Matrix x = condition(latent, prompt);
    KVEntry kv;
    kv.keys = x * model.w_k();
    kv.values = x * model.w_v();
    kv.latent_checksum = checksum(latent);
    return kv;
}

Matrix finish_block(const ToyModel& model, const Matrix& query_latent, const Matrix& mixed_heads) {
    const Matrix h = query_latent + mixed_heads * model.w_o();
    Matrix out = h + (h * model.w_mlp()).array().tanh().matrix();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double rms = std::sqrt(out.row(r).squaredNorm() / static_cast<double>(out.cols()) + 1e-12);
        out.row(r) /= rms;
    }
    return out;
}

namespace {

/// Running softmax state for one head: max logit, normaliser and weighted value sum per query row.
struct OnlineSoftmax {
    Vector row_max;
    Vector row_sum;
    Matrix acc;

    OnlineSoftmax(Eigen::Index rows, Eigen::Index dim)
        : row_max(Vector::Constant(rows, -std::numeric_limits<double>::infinity())),
          row_sum(Vector::Zero(rows)),
          acc(Matrix::Zero(rows, dim)) {}

    void absorb(const Matrix& logits, const Matrix& values) {
        const Vector block_max = logits.rowwise().maxCoeff();
        const Vector new_max = row_max.cwiseMax(block_max);
        const Vector correction = (row_max - new_max).array().exp();
        const Matrix p = (logits.colwise() - new_max).array().exp();
        row_sum = row_sum.cwiseProduct(correction) + p.rowwise().sum();
        acc = correction.asDiagonal() * acc + p * values;
        row_max = new_max;
    }

    Matrix result() const { return row_sum.cwiseInverse().asDiagonal() * acc; }
};

}  // namespace

Matrix attend(const ToyModel& model, const Matrix& query_latent, const PromptEmbedding& prompt,
              const AnchorMemoryView& mem, const PositionMap& pmap, const RopeConfig& rope) {
    model.check_latent(query_latent);
    model.check_prompt(prompt);
    const auto& cfg = model.config();
    const int hd = cfg.head_dim();
    if (rope.head_dim != hd) throw DimensionError("rope head_dim does not match the model");

    std::vector<int> positions;
    positions.reserve(mem.entries.size());
    for (const auto& e : mem.entries) {
        const auto p = pmap.position_of(e.kv.frame);
        if (!p) throw StateError("no position assigned to frame " + std::to_string(e.kv.frame));
        positions.push_back(*p);
    }

    const Matrix x = condition(query_latent, prompt);
    const Matrix q = x * model.w_q();
    const Matrix k_self = x * model.w_k();
    const Matrix v_self = x * model.w_v();
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    Matrix mixed(cfg.tokens_per_frame, cfg.d_model);
    for (int h = 0; h < cfg.n_heads; ++h) {
        const Matrix q_rot = rotate_rows(q.middleCols(h * hd, hd), pmap.query_position, rope);
        OnlineSoftmax acc(q_rot.rows(), hd);
        for (std::size_t i = 0; i < mem.entries.size(); ++i) {
            const auto& kv = mem.entries[i].kv;
            const Matrix k_rot = rotate_rows(kv.keys.middleCols(h * hd, hd), positions[i], rope);
            acc.absorb(scale * q_rot * k_rot.transpose(), kv.values.middleCols(h * hd, hd));
        }
        const Matrix k_rot = rotate_rows(k_self.middleCols(h * hd, hd), pmap.query_position, rope);
        acc.absorb(scale * q_rot * k_rot.transpose(), v_self.middleCols(h * hd, hd));
        mixed.middleCols(h * hd, hd) = acc.result();
    }
    return finish_block(model, query_latent, mixed);
}

Matrix seeded_noise(const ModelConfig& cfg, int t, std::uint64_t noise_seed) {
    std::mt19937_64 rng(splitmix64(noise_seed ^ splitmix64(static_cast<std::uint64_t>(t))));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(cfg.tokens_per_frame, cfg.d_model);
    for (int r = 0; r < z.rows(); ++r) {
        for (int c = 0; c < z.cols(); ++c) z(r, c) = normal(rng);
    }
    return z;
}

GeneratedFrame generate_frame(const ToyModel& model, const AnchorMemoryView& mem, const PositionMap& pmap,
                              const PromptEmbedding& prompt, int segment, int t, std::uint64_t noise_seed,
                              const RopeConfig& rope) {
    for (const auto& e : mem.entries) {
        if (e.kv.frame >= t) {
            throw StateError("frame " + std::to_string(t) + " cannot read cached frame " + std::to_string(e.kv.frame));
        }
    }
    GeneratedFrame out;
    out.latent = attend(model, seeded_noise(model.config(), t, noise_seed), prompt, mem, pmap, rope);
    out.kv = compute_kv(model, out.latent, prompt);
    out.kv.frame = t;
    out.kv.prompt_segment = segment;
    return out;
}

}  // namespace anchorkv
