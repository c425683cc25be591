// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only generators and brute-force oracles. Nothing here calls the
// library's rotary or attention kernels.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <vector>

#include "anchorkv/engine.hpp"

namespace anchorkv::testing {

inline PromptSchedule make_schedule(std::vector<int> boundaries, int total, int d_model = 32) {
    std::vector<PromptEmbedding> prompts;
    for (std::size_t i = 0; i <= boundaries.size(); ++i) {
        prompts.push_back(make_prompt_embedding(static_cast<std::int64_t>(100 + i), d_model));
    }
    return PromptSchedule(std::move(prompts), std::move(boundaries), total);
}

/// Random schedule: horizon in [1, max_horizon], up to `max_boundaries` switches.
inline PromptSchedule random_schedule(std::mt19937_64& rng, int max_horizon = 200, int max_boundaries = 5) {
    const int total = std::uniform_int_distribution<int>(1, max_horizon)(rng);
    const int wanted = std::uniform_int_distribution<int>(0, max_boundaries)(rng);
    std::set<int> picks;
    if (total > 1) {
        std::uniform_int_distribution<int> frame(1, total - 1);
        for (int i = 0; i < wanted && static_cast<int>(picks.size()) < total - 1; ++i) picks.insert(frame(rng));
    }
    std::vector<PromptEmbedding> prompts;
    for (std::size_t i = 0; i <= picks.size(); ++i) {
        prompts.push_back(make_prompt_embedding(static_cast<std::int64_t>(rng() % 100000), 32));
    }
    return PromptSchedule(std::move(prompts), std::vector<int>(picks.begin(), picks.end()), total);
}

/// Rotary embedding via complex multiplication, channel pair (2j, 2j+1) as re/im.
inline Matrix complex_rotate(const Matrix& rows, long pos, double base) {
    const auto d = rows.cols();
    Matrix out(rows.rows(), d);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index j = 0; j < d / 2; ++j) {
            const double freq = 1.0 / std::pow(base, static_cast<double>(2 * j) / static_cast<double>(d));
            const std::complex<double> z(rows(r, 2 * j), rows(r, 2 * j + 1));
            const auto w = z * std::polar(1.0, static_cast<double>(pos) * freq);
            out(r, 2 * j) = w.real();
            out(r, 2 * j + 1) = w.imag();
        }
    }
    return out;
}

/**
 * Dense attention: materialise every rotated key of the memory plus the query
 * frame, one softmax over the whole row, then the output stage written out longhand.
 */
inline Matrix dense_attention(const ToyModel& model, const Matrix& query_latent, const PromptEmbedding& prompt,
                              const AnchorMemoryView& mem, const PositionMap& pmap, double base) {
    const auto& cfg = model.config();
    const int hd = cfg.head_dim();
    const int tpf = cfg.tokens_per_frame;
    const int n_keys = static_cast<int>(mem.entries.size() + 1) * tpf;

    Matrix x = query_latent;
    for (int r = 0; r < tpf; ++r) x.row(r) += prompt.vector.transpose();
    const Matrix q = x * model.w_q();
    const Matrix k_self = x * model.w_k();
    const Matrix v_self = x * model.w_v();

    Matrix mixed(tpf, cfg.d_model);
    for (int h = 0; h < cfg.n_heads; ++h) {
        Matrix keys(n_keys, hd), values(n_keys, hd);
        int row = 0;
        for (const auto& e : mem.entries) {
            long pos = -1;
            for (const auto& pe : pmap.entries) {
                if (pe.frame == e.kv.frame) pos = pe.pos;
            }
            keys.middleRows(row, tpf) = complex_rotate(e.kv.keys.middleCols(h * hd, hd), pos, base);
            values.middleRows(row, tpf) = e.kv.values.middleCols(h * hd, hd);
            row += tpf;
        }
        keys.middleRows(row, tpf) = complex_rotate(k_self.middleCols(h * hd, hd), pmap.query_position, base);
        values.middleRows(row, tpf) = v_self.middleCols(h * hd, hd);

        const Matrix qh = complex_rotate(q.middleCols(h * hd, hd), pmap.query_position, base);
        for (int r = 0; r < tpf; ++r) {
            std::vector<double> logits(n_keys);
            double mx = -1e300;
            for (int k = 0; k < n_keys; ++k) {
                double dot = 0.0;
                for (int c = 0; c < hd; ++c) dot += qh(r, c) * keys(k, c);
                logits[k] = dot / std::sqrt(static_cast<double>(hd));
                mx = std::max(mx, logits[k]);
            }
            double z = 0.0;
            for (auto& l : logits) z += (l = std::exp(l - mx));
            for (int c = 0; c < hd; ++c) {
                double acc = 0.0;
                for (int k = 0; k < n_keys; ++k) acc += logits[k] / z * values(k, c);
                mixed(r, h * hd + c) = acc;
            }
        }
    }

    const Matrix hidden = query_latent + mixed * model.w_o();
    const Matrix pre = hidden * model.w_mlp();
    Matrix out(tpf, cfg.d_model);
    for (int r = 0; r < tpf; ++r) {
        double ss = 0.0;
        for (int c = 0; c < cfg.d_model; ++c) {
            out(r, c) = hidden(r, c) + std::tanh(pre(r, c));
            ss += out(r, c) * out(r, c);
        }
        const double rms = std::sqrt(ss / cfg.d_model + 1e-12);
        for (int c = 0; c < cfg.d_model; ++c) out(r, c) /= rms;
    }
    return out;
}

inline double max_relative_error(const Matrix& got, const Matrix& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline std::set<std::pair<int, Region>> frame_regions(const AnchorMemoryView& view) {
    std::set<std::pair<int, Region>> out;
    for (const auto& e : view.entries) out.insert({e.kv.frame, e.region});
    return out;
}

inline std::set<std::pair<int, Region>> frame_regions(const FrameTrace& trace) {
    std::set<std::pair<int, Region>> out;
    for (const auto& e : trace.entries) out.insert({e.frame, e.region});
    return out;
}

inline std::vector<int> frames_in(const AnchorMemoryView& view, Region r) {
    std::vector<int> out;
    for (const auto& e : view.entries) {
        if (e.region == r) out.push_back(e.kv.frame);
    }
    return out;
}

inline std::vector<int> iota(int lo, int hi_inclusive) {
    std::vector<int> v;
    for (int i = lo; i <= hi_inclusive; ++i) v.push_back(i);
    return v;
}

/// KV entry with placeholder tensors, for structural cache tests.
inline KVEntry dummy_kv(int frame, int segment = 0) {
    KVEntry kv;
    kv.frame = frame;
    kv.keys = Matrix::Constant(1, 2, frame);
    kv.values = Matrix::Constant(1, 2, -frame);
    kv.prompt_segment = segment;
    return kv;
}

}  // namespace anchorkv::testing
