// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "anchorkv/common.hpp"
#include "anchorkv/rope.hpp"
#include "anchorkv/schedule.hpp"

namespace anchorkv {

/**
 * Key/value projections of one latent frame. Keys and values are stored before
 * rotation as `tokens x d_model`; head `h` occupies columns [h*head_dim, (h+1)*head_dim).
 */
struct KVEntry {
    int frame = -1;
    Matrix keys;
    Matrix values;
    int prompt_segment = 0;
    std::uint64_t latent_checksum = 0;
};

struct FrameLatent {
    int frame = 0;
    Matrix latent;
};

/**
 * Three-region cache owned by one engine.
 *
 * - sink: the earliest `config.sink` frames, frozen once full
 * - junction: empty, or the `config.junction` frames starting at `junction_boundary`
 * - local: the last `config.window` pushed frames (fewer after a flush), newest last
 * - latent_history: latents of the last `config.window` frames, for re-cache
 */
struct CacheState {
    CacheConfig config;
    std::vector<KVEntry> sink;
    std::vector<KVEntry> junction;
    std::optional<int> junction_boundary;
    std::deque<KVEntry> local;
    std::deque<FrameLatent> latent_history;
    int frames_generated = 0;

    explicit CacheState(CacheConfig cfg = {});

    /// KV entries held across all regions (latent history excluded).
    std::size_t retained_entries() const noexcept { return sink.size() + junction.size() + local.size(); }
};

struct ViewEntry {
    Region region = Region::Local;
    KVEntry kv;
};

/// Memory used to generate frame `t`, ordered sink, junction, local, with no repeated frame.
struct AnchorMemoryView {
    int t = 0;
    std::vector<ViewEntry> entries;
    std::optional<int> junction_boundary;

    std::vector<FrameSlot> slots() const;
    std::size_t count(Region r) const;
    bool contains(int frame) const;
};

/// Appends `entry` (which must be frame `frames_generated`) and rolls the window.
CacheState push_frame(CacheState state, KVEntry entry, Matrix latent);

/// Replaces the junction with `entries`, which must be frames boundary .. boundary+N_J-1.
CacheState refresh_junction(CacheState state, int boundary, std::vector<KVEntry> entries);

/// Memory for frame `t`: sink, local, and the junction when the gate is open.
AnchorMemoryView assemble(const CacheState& state, int t, const PromptSchedule& sched);

/**
 * Same as `assemble` with the most recent switch given explicitly. Used to view the
 * memory as it stood under the previous segment when a boundary arrives.
 */
AnchorMemoryView assemble_at(const CacheState& state, int t, std::optional<int> last_switch);

/// Position assignment for an assembled view.
PositionMap assign_positions(const AnchorMemoryView& view, const RopeConfig& cfg, const CacheConfig& cache,
                             RopeMode mode);

struct JunctionRefresh {
    int boundary = 0;
    std::vector<KVEntry> entries;
};

/// Full record of a run: every frame's KV as generated, every junction refresh, every flush.
struct StreamHistory {
    std::vector<KVEntry> frames;
    std::vector<JunctionRefresh> refreshes;
    std::vector<int> flushes;
};

/**
 * Ground-truth memory for frame `t`, rebuilt by slicing the full history with no
 * incremental state. `assemble` must agree with it on (frame, region) for every t.
 */
AnchorMemoryView reconstruct_oracle(const StreamHistory& history, int t, const PromptSchedule& sched,
                                    const CacheConfig& config);

}  // namespace anchorkv
