// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>

#include <Eigen/Dense>

namespace anchorkv {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Frame latents and KV blocks are `tokens_per_frame x d_model`.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// FNV-1a over the raw bytes of a dense Eigen object.
template <typename Derived>
std::uint64_t checksum(const Eigen::DenseBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const Scalar v = m(r, c);
            unsigned char bytes[sizeof(Scalar)];
            std::memcpy(bytes, &v, sizeof(Scalar));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return h;
}

}  // namespace anchorkv

namespace anchorkv {

/// Region sizes of the anchor memory: sink frames, junction frames, local window.
struct CacheConfig {
    int sink = 3;
    int junction = 3;
    int window = 9;

    int capacity() const noexcept { return sink + junction + window; }
};

}  // namespace anchorkv
