// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include "anchorkv/errors.hpp"
#include "anchorkv/memory.hpp"

namespace anchorkv {

AnchorMemoryView reconstruct_oracle(const StreamHistory& history, int t, const PromptSchedule& sched,
                                    const CacheConfig& config) {
    auto frame_kv = [&](int f) -> const KVEntry& {
        if (f < 0 || f >= static_cast<int>(history.frames.size()) || history.frames[f].frame != f) {
            throw StateError("history is missing frame " + std::to_string(f));
        }
        return history.frames[f];
    };

    AnchorMemoryView view;
    view.t = t;
    std::set<int> taken;

    // S = KV[0 : N_S - 1], restricted to frames that exist before t.
    for (int f = 0; f < std::min(config.sink, t); ++f) {
        taken.insert(f);
        view.entries.push_back({Region::Sink, frame_kv(f)});
    }

    // J = KV[s : s + N_J - 1] when the gate is open and a refresh was recorded for s.
    if (junction_active(sched, t, config.junction, config.window)) {
        const int s = last_boundary(sched, t);
        const auto it = std::find_if(history.refreshes.begin(), history.refreshes.end(),
                                     [s](const JunctionRefresh& r) { return r.boundary == s; });
        if (it != history.refreshes.end()) {
            view.junction_boundary = s;
            for (const auto& e : it->entries) {
                if (taken.insert(e.frame).second) view.entries.push_back({Region::Junction, e});
            }
        }
    }

    // Local = KV[t - W : t - 1], cut at the most recent flush.
    int lo = std::max(0, t - config.window);
    for (int f : history.flushes) {
        if (f <= t) lo = std::max(lo, f);
    }
    for (int f = lo; f < t; ++f) {
        if (taken.insert(f).second) view.entries.push_back({Region::Local, frame_kv(f)});
    }
    return view;
}

}  // namespace anchorkv
