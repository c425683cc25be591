// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/memory.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "anchorkv/errors.hpp"

namespace anchorkv {

CacheState::CacheState(CacheConfig cfg) : config(cfg) {
    if (cfg.sink < 0 || cfg.junction < 0 || cfg.window < 1) {
        throw std::invalid_argument("cache config needs sink >= 0, junction >= 0, window >= 1");
    }
}

std::vector<FrameSlot> AnchorMemoryView::slots() const {
    std::vector<FrameSlot> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back({e.kv.frame, e.region});
    return out;
}

std::size_t AnchorMemoryView::count(Region r) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [r](const ViewEntry& e) { return e.region == r; }));
}

bool AnchorMemoryView::contains(int frame) const {
    return std::any_of(entries.begin(), entries.end(), [frame](const ViewEntry& e) { return e.kv.frame == frame; });
}

CacheState push_frame(CacheState state, KVEntry entry, Matrix latent) {
    if (entry.frame != state.frames_generated) {
        throw SequenceError("expected frame " + std::to_string(state.frames_generated) + ", got " +
                            std::to_string(entry.frame));
    }
    const auto& cfg = state.config;
    const int frame = entry.frame;
    if (static_cast<int>(state.sink.size()) < cfg.sink) state.sink.push_back(entry);
    state.local.push_back(std::move(entry));
    while (static_cast<int>(state.local.size()) > cfg.window) state.local.pop_front();
    state.latent_history.push_back({frame, std::move(latent)});
    while (static_cast<int>(state.latent_history.size()) > cfg.window) state.latent_history.pop_front();
    ++state.frames_generated;
    return state;
}

CacheState refresh_junction(CacheState state, int boundary, std::vector<KVEntry> entries) {
    if (static_cast<int>(entries.size()) != state.config.junction) {
        throw ShapeError("junction refresh needs " + std::to_string(state.config.junction) + " frames, got " +
                         std::to_string(entries.size()));
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].frame != boundary + static_cast<int>(i)) {
            throw ShapeError("junction frames must be contiguous from " + std::to_string(boundary) + "; slot " +
                             std::to_string(i) + " holds frame " + std::to_string(entries[i].frame));
        }
        if (entries[i].prompt_segment != entries.front().prompt_segment) {
            throw ShapeError("junction frames span more than one prompt segment");
        }
    }
    state.junction = std::move(entries);
    state.junction_boundary = boundary;
    return state;
}

AnchorMemoryView assemble_at(const CacheState& state, int t, std::optional<int> last_switch) {
    if (t != state.frames_generated) {
        throw StateError("cannot assemble frame " + std::to_string(t) + " after " +
                         std::to_string(state.frames_generated) + " pushed frames");
    }
    const auto& cfg = state.config;
    AnchorMemoryView view;
    view.t = t;
    std::unordered_set<int> taken;

    for (const auto& e : state.sink) {
        taken.insert(e.frame);
        view.entries.push_back({Region::Sink, e});
    }

    const bool delta = junction_active_for(last_switch.has_value(), last_switch.value_or(0), t, cfg.junction,
                                           cfg.window);
    if (delta && !state.junction.empty()) {
        if (state.junction_boundary != last_switch) {
            throw StateError("junction holds boundary " + std::to_string(state.junction_boundary.value_or(-1)) +
                             " but the active boundary is " + std::to_string(*last_switch));
        }
        view.junction_boundary = state.junction_boundary;
        for (const auto& e : state.junction) {
            if (taken.insert(e.frame).second) view.entries.push_back({Region::Junction, e});
        }
    }

    for (const auto& e : state.local) {
        if (taken.insert(e.frame).second) view.entries.push_back({Region::Local, e});
    }
    return view;
}

AnchorMemoryView assemble(const CacheState& state, int t, const PromptSchedule& sched) {
    const int seg = active_segment(sched, t);
    return assemble_at(state, t, seg > 0 ? std::optional<int>(sched.boundaries()[seg - 1]) : std::nullopt);
}

PositionMap assign_positions(const AnchorMemoryView& view, const RopeConfig& cfg, const CacheConfig& cache,
                             RopeMode mode) {
    const auto slots = view.slots();
    return assign_positions(slots, view.t, view.junction_boundary, cfg, cache, mode);
}

}  // namespace anchorkv
