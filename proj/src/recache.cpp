// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/recache.hpp"

#include <algorithm>
#include <string>

#include "anchorkv/errors.hpp"

namespace anchorkv {

std::string_view to_string(StrategyId s) {
    switch (s) {
        case StrategyId::BaselineRecache: return "baseline";
        case StrategyId::Flush: return "flush";
        case StrategyId::AnchorGuided: return "anchor";
    }
    return "?";
}

StrategyId strategy_from_string(std::string_view s) {
    if (s == "baseline") return StrategyId::BaselineRecache;
    if (s == "flush") return StrategyId::Flush;
    if (s == "anchor") return StrategyId::AnchorGuided;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

namespace {

const Matrix& latent_for(const CacheState& state, int frame) {
    const auto it = std::find_if(state.latent_history.begin(), state.latent_history.end(),
                                 [frame](const FrameLatent& l) { return l.frame == frame; });
    if (it == state.latent_history.end()) {
        throw StateError("re-cache needs the latent of frame " + std::to_string(frame) + ", which is not retained");
    }
    return it->latent;
}

void drop_junction(CacheState& state) {
    state.junction.clear();
    state.junction_boundary.reset();
}

}  // namespace

CacheState recache_baseline(CacheState state, const PromptEmbedding& new_prompt, int new_segment,
                            const ToyModel& model) {
    for (auto& entry : state.local) {
        KVEntry fresh = compute_kv(model, latent_for(state, entry.frame), new_prompt);
        fresh.frame = entry.frame;
        fresh.prompt_segment = new_segment;
        entry = std::move(fresh);
    }
    drop_junction(state);
    return state;
}

CacheState recache_flush(CacheState state) {
    state.local.clear();
    drop_junction(state);
    return state;
}

CacheState recache_anchor(CacheState state, const PromptEmbedding& new_prompt, int new_segment,
                          const ToyModel& model, const PromptSchedule& sched, int f, const RopeConfig& rope,
                          RopeMode mode) {
    if (!sched.is_boundary(f)) throw StateError("anchor re-cache invoked off-boundary at " + std::to_string(f));
    if (state.frames_generated != f) {
        throw StateError("pre-switch anchor memory for " + std::to_string(f) + " unavailable after " +
                         std::to_string(state.frames_generated) + " frames");
    }
    const int seg = active_segment(sched, f);
    const std::optional<int> previous_switch =
        seg >= 2 ? std::optional<int>(sched.boundaries()[seg - 2]) : std::nullopt;
    const AnchorMemoryView pre = assemble_at(state, f, previous_switch);
    const PositionMap pre_map = assign_positions(pre, rope, state.config, mode);

    std::vector<KVEntry> rebuilt;
    rebuilt.reserve(state.local.size());
    for (const auto& entry : state.local) {
        AnchorMemoryView others;
        others.t = pre.t;
        others.junction_boundary = pre.junction_boundary;
        for (const auto& e : pre.entries) {
            if (e.kv.frame != entry.frame) others.entries.push_back(e);
        }
        PositionMap map = pre_map;
        if (const auto p = pre_map.position_of(entry.frame)) map.query_position = *p;

        const Matrix warm = attend(model, latent_for(state, entry.frame), new_prompt, others, map, rope);
        KVEntry fresh = compute_kv(model, warm, new_prompt);
        fresh.frame = entry.frame;
        fresh.prompt_segment = new_segment;
        fresh.latent_checksum = entry.latent_checksum;
        rebuilt.push_back(std::move(fresh));
    }
    for (std::size_t i = 0; i < rebuilt.size(); ++i) state.local[i] = std::move(rebuilt[i]);
    drop_junction(state);
    return state;
}

}  // namespace anchorkv
