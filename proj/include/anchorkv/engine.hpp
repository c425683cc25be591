// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchorkv/memory.hpp"
#include "anchorkv/model.hpp"
#include "anchorkv/recache.hpp"
#include "anchorkv/rope.hpp"
#include "anchorkv/schedule.hpp"

namespace anchorkv {

struct EngineConfig {
    CacheConfig cache;
    RopeConfig rope;
    ModelConfig model;
    StrategyId strategy = StrategyId::AnchorGuided;
    RopeMode rope_mode = RopeMode::TriRegion;
    std::uint64_t noise_seed = 0;
    /// Abort on invariant breach; otherwise breaches become trace warnings.
    bool checked = true;
    /// Keep a StreamHistory for oracle comparison (grows with the run).
    bool record_history = false;

    /// Default configuration sized for a schedule's `d_model`.
    static EngineConfig for_d_model(int d_model);

    void validate() const;
    /// Non-fatal configuration concerns, e.g. a window too large for a disjoint layout.
    std::vector<std::string> warnings() const;
};

nlohmann::json engine_config_to_json(const EngineConfig& cfg);
EngineConfig engine_config_from_json(const nlohmann::json& doc);

/// Replay record for one generated frame.
struct FrameTrace {
    int t = 0;
    int segment = 0;
    int last_boundary = 0;
    bool delta = false;
    std::vector<PositionEntry> entries;
    int query_pos = 0;
    double latent_norm = 0.0;
    std::uint64_t latent_checksum = 0;
    std::vector<std::string> warnings;

    bool operator==(const FrameTrace&) const = default;
};

/// Everything one generation step saw; handed to an observer for offline checks.
struct StepContext {
    int t;
    const AnchorMemoryView& view;
    const PositionMap& positions;
    const Matrix& query_latent;
    const PromptEmbedding& prompt;
    const Matrix& latent;
};

using StepObserver = std::function<void(const StepContext&)>;

/**
 * Causal streaming loop over a prompt schedule.
 *
 * Each `step` handles one frame: apply the strategy's re-cache if the frame is a
 * boundary, assemble the anchor memory, assign positions, generate, push, and (for
 * the anchor strategy) refresh the junction once its frames exist.
 */
class Engine {
public:
    Engine(PromptSchedule sched, EngineConfig cfg);

    FrameTrace step();
    bool done() const noexcept { return state_.frames_generated >= sched_.total_frames(); }
    int next_frame() const noexcept { return state_.frames_generated; }

    const PromptSchedule& schedule() const noexcept { return sched_; }
    const EngineConfig& config() const noexcept { return cfg_; }
    const ToyModel& model() const noexcept { return *model_; }
    const CacheState& cache() const noexcept { return state_; }
    const StreamHistory& history() const noexcept { return history_; }

    void set_observer(StepObserver observer) { observer_ = std::move(observer); }

    /// Versioned JSON blob with schedule, config, cache state and the next frame index.
    nlohmann::json snapshot() const;
    static Engine restore(const nlohmann::json& snapshot);

private:
    void on_boundary(int t);
    void check(bool ok, const char* invariant, int t, const std::string& detail, FrameTrace& trace) const;
    void audit(const AnchorMemoryView& view, const PositionMap& map, FrameTrace& trace) const;

    PromptSchedule sched_;
    EngineConfig cfg_;
    std::shared_ptr<const ToyModel> model_;
    CacheState state_;
    std::optional<int> pending_boundary_;
    std::vector<KVEntry> pending_junction_;
    StreamHistory history_;
    StepObserver observer_;

};

/// Runs every frame of `sched` and returns one trace per frame.
std::vector<FrameTrace> run(const PromptSchedule& sched, const EngineConfig& cfg);

}  // namespace anchorkv
