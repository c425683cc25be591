// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/rope.hpp"

#include <algorithm>
#include <map>

namespace anchorkv {

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Sink: return "sink";
        case Region::Junction: return "junction";
        case Region::Local: return "local";
    }
    return "?";
}

std::string_view to_string(RopeMode m) {
    switch (m) {
        case RopeMode::TriRegion: return "tri";
        case RopeMode::Bounded: return "bounded";
        case RopeMode::Unbounded: return "unbounded";
    }
    return "?";
}

Region region_from_string(std::string_view s) {
    if (s == "sink") return Region::Sink;
    if (s == "junction") return Region::Junction;
    if (s == "local") return Region::Local;
    throw std::invalid_argument("unknown region '" + std::string(s) + "'");
}

RopeMode rope_mode_from_string(std::string_view s) {
    if (s == "tri") return RopeMode::TriRegion;
    if (s == "bounded") return RopeMode::Bounded;
    if (s == "unbounded") return RopeMode::Unbounded;
    throw std::invalid_argument("unknown rope mode '" + std::string(s) + "'");
}

void RopeConfig::validate() const {
    if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
    if (head_dim <= 0 || head_dim % 2 != 0) throw DimensionError("head_dim must be positive and even");
    if (!(base > 1.0)) throw std::invalid_argument("rope base must be > 1");
}

std::optional<int> PositionMap::position_of(int frame) const {
    for (const auto& e : entries) {
        if (e.frame == frame) return e.pos;
    }
    return std::nullopt;
}

int PositionMap::max_position() const {
    int m = query_position;
    for (const auto& e : entries) m = std::max(m, e.pos);
    return m;
}

int local_position(int k, int t, int w, const RopeConfig& cfg) {
    if (w < 1 || k < 0 || k > w - 1) {
        throw RangeError("local offset " + std::to_string(k) + " outside [0, " + std::to_string(w - 1) + "]");
    }
    const int p = t < cfg.p_max ? t - w + k : cfg.p_max - w + k;
    return std::max(p, 0);
}

int junction_position(int m, int t, int n_j, int w, const RopeConfig& cfg) {
    if (m < 0 || m > n_j - 1) {
        throw RangeError("junction offset " + std::to_string(m) + " outside [0, " + std::to_string(n_j - 1) + "]");
    }
    const int first_local = t < cfg.p_max ? t - w : cfg.p_max - w;
    const int p = first_local - n_j + m;
    if (p < 0) throw RangeError("junction position below zero at t=" + std::to_string(t));
    return p;
}

int query_position(int t, const RopeConfig& cfg, RopeMode mode) {
    if (mode == RopeMode::Unbounded) return t;
    return std::min(t, cfg.p_max);
}

PositionMap assign_positions(std::span<const FrameSlot> slots, int t, std::optional<int> junction_boundary,
                             const RopeConfig& cfg, const CacheConfig& cache, RopeMode mode) {
    PositionMap map;
    map.query_position = query_position(t, cfg, mode);
    map.entries.reserve(slots.size());

    std::vector<int> sink_frames;
    for (const auto& s : slots) {
        if (s.frame < 0 || s.frame >= t) {
            throw StateError("frame " + std::to_string(s.frame) + " cannot condition frame " + std::to_string(t));
        }
        if (s.region == Region::Sink) sink_frames.push_back(s.frame);
    }
    std::sort(sink_frames.begin(), sink_frames.end());

    for (const auto& s : slots) {
        int pos = s.frame;
        if (mode == RopeMode::Bounded) {
            pos = std::min(s.frame, cfg.p_max);
        } else if (mode == RopeMode::TriRegion) {
            switch (s.region) {
                case Region::Sink:
                    pos = static_cast<int>(std::lower_bound(sink_frames.begin(), sink_frames.end(), s.frame) -
                                           sink_frames.begin());
                    break;
                case Region::Local: {
                    const int k = s.frame - (t - cache.window);
                    if (k < 0 || k >= cache.window) {
                        throw StateError("local frame " + std::to_string(s.frame) + " outside the window of t=" +
                                         std::to_string(t));
                    }
                    pos = local_position(k, t, cache.window, cfg);
                    break;
                }
                case Region::Junction: {
                    if (!junction_boundary) throw StateError("junction slot without a junction boundary");
                    const int m = s.frame - *junction_boundary;
                    if (m < 0 || m >= cache.junction) {
                        throw StateError("junction frame " + std::to_string(s.frame) + " outside the junction of " +
                                         std::to_string(*junction_boundary));
                    }
                    pos = junction_position(m, t, cache.junction, cache.window, cfg);
                    break;
                }
            }
        }
        map.entries.push_back({s.frame, s.region, pos});
    }

    if (mode == RopeMode::TriRegion) {
        std::map<int, int> seen;
        for (const auto& e : map.entries) {
            auto [it, fresh] = seen.emplace(e.pos, e.frame);
            if (!fresh) {
                map.warnings.push_back("position-collision: frames " + std::to_string(it->second) + " and " +
                                       std::to_string(e.frame) + " share position " + std::to_string(e.pos));
            }
        }
    }
    return map;
}

}  // namespace anchorkv
