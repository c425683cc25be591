// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anchorkv/common.hpp"
#include "anchorkv/errors.hpp"

namespace anchorkv {

enum class Region { Sink, Junction, Local };

/// How cached frames and the query are mapped onto rotary positions.
enum class RopeMode {
    TriRegion,  ///< sink 0..N_S-1, junction in front of local, local re-indexed under the bound
    Bounded,    ///< latent index clamped at p_max
    Unbounded,  ///< raw latent index (baseline; may exceed p_max)
};

std::string_view to_string(Region r);
std::string_view to_string(RopeMode m);
Region region_from_string(std::string_view s);
RopeMode rope_mode_from_string(std::string_view s);

struct RopeConfig {
    int p_max = 21;
    double base = 10000.0;
    int head_dim = 8;

    void validate() const;
};

/// Rotation angle of channel pair `j` at position `pos`: pos * base^(-2j / head_dim).
inline double rope_angle(int pos, int pair, const RopeConfig& cfg) {
    return static_cast<double>(pos) * std::pow(cfg.base, -2.0 * pair / cfg.head_dim);
}

/**
 * Applies the rotary embedding at `pos` to every row of `rows` (each row is one
 * token's head vector). Channel pairs are (2j, 2j+1).
 */
template <typename Derived>
MatrixX<typename Derived::Scalar> rotate_rows(const Eigen::MatrixBase<Derived>& rows, int pos, const RopeConfig& cfg) {
    using Scalar = typename Derived::Scalar;
    if (rows.cols() % 2 != 0 || rows.cols() != cfg.head_dim) {
        throw DimensionError("rotary input needs " + std::to_string(cfg.head_dim) + " (even) columns, got " +
                             std::to_string(rows.cols()));
    }
    if (pos < 0) throw RangeError("rotary position must be >= 0, got " + std::to_string(pos));

    MatrixX<Scalar> out(rows.rows(), rows.cols());
    for (Eigen::Index j = 0; j < rows.cols() / 2; ++j) {
        const double angle = rope_angle(pos, static_cast<int>(j), cfg);
        const Scalar c = static_cast<Scalar>(std::cos(angle));
        const Scalar s = static_cast<Scalar>(std::sin(angle));
        const auto x0 = rows.col(2 * j);
        const auto x1 = rows.col(2 * j + 1);
        out.col(2 * j) = c * x0 - s * x1;
        out.col(2 * j + 1) = s * x0 + c * x1;
    }
    return out;
}

/// Rotates a single head vector (row or column) at `pos`.
template <typename Derived>
VectorX<typename Derived::Scalar> rotate(const Eigen::MatrixBase<Derived>& vec, int pos, const RopeConfig& cfg) {
    if (vec.rows() != 1 && vec.cols() != 1) throw DimensionError("rotate expects a vector");
    const auto n = vec.size();
    if (n % 2 != 0) throw DimensionError("rotate expects an even-length vector, got " + std::to_string(n));
    MatrixX<typename Derived::Scalar> row(1, n);
    for (Eigen::Index i = 0; i < n; ++i) row(0, i) = vec(i);
    return rotate_rows(row, pos, cfg).transpose();
}

/// One cached frame as seen by position assignment.
struct FrameSlot {
    int frame = 0;
    Region region = Region::Local;
};

struct PositionEntry {
    int frame = 0;
    Region region = Region::Local;
    int pos = 0;

    bool operator==(const PositionEntry&) const = default;
};

struct PositionMap {
    std::vector<PositionEntry> entries;
    int query_position = 0;
    std::vector<std::string> warnings;

    std::optional<int> position_of(int frame) const;
    /// Largest position over entries and the query.
    int max_position() const;
};

/**
 * Position of the cached local frame at window offset `k`, where offset k holds
 * frame `t - w + k` (the W frames preceding `t`). Latent index while t < p_max,
 * `p_max - w + k` afterwards; clamped at 0.
 */
int local_position(int k, int t, int w, const RopeConfig& cfg);

/// Position of junction frame `m`, placed `n_j` slots in front of local offset 0.
int junction_position(int m, int t, int n_j, int w, const RopeConfig& cfg);

/// Query position of frame `t` under `mode`.
int query_position(int t, const RopeConfig& cfg, RopeMode mode);

/**
 * Assigns positions to the cached frames used to generate frame `t`.
 * `junction_boundary` is the first junction frame (required when any slot is a junction).
 * Throws StateError for slots at or after `t`.
 */
PositionMap assign_positions(std::span<const FrameSlot> slots, int t, std::optional<int> junction_boundary,
                             const RopeConfig& cfg, const CacheConfig& cache, RopeMode mode);

}  // namespace anchorkv
