// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchorkv/engine.hpp"

namespace anchorkv {

/// Post-switch frames {boundary .. boundary+N_J-1} still visible at `probe_frame`.
struct RetentionProbe {
    int boundary = 0;
    int probe_frame = 0;
    int retained = 0;
};

struct Occupancy {
    int t = 0;
    int sink = 0;
    int junction = 0;
    int local = 0;
};

struct StrategyRun {
    StrategyId strategy = StrategyId::AnchorGuided;
    int max_position = 0;
    std::vector<RetentionProbe> retention;
    std::vector<Occupancy> occupancy;
    std::vector<FrameTrace> traces;
};

/// First frame whose latent checksum differs between two runs.
struct Divergence {
    StrategyId a;
    StrategyId b;
    std::optional<int> frame;
};

struct ComparisonReport {
    std::vector<StrategyRun> runs;
    std::vector<Divergence> divergences;

    const StrategyRun& run(StrategyId s) const;
    std::optional<int> divergence(StrategyId a, StrategyId b) const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/**
 * Runs the schedule once per strategy with identical seeds (in parallel) and reports
 * retention at `boundary + offset` for every boundary/offset pair inside the horizon.
 */
ComparisonReport compare_strategies(const PromptSchedule& sched, const EngineConfig& base,
                                    std::span<const StrategyId> strategies, std::span<const int> probe_offsets);

}  // namespace anchorkv
