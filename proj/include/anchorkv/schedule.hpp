// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "anchorkv/common.hpp"

namespace anchorkv {

/// Conditioning vector for one prompt segment. Derived deterministically from `seed`.
struct PromptEmbedding {
    Vector vector;
    std::int64_t seed = 0;
};

/// Unit-norm pseudo-random embedding of dimension `d_model`.
PromptEmbedding make_prompt_embedding(std::int64_t seed, int d_model);

/**
 * Prompt stream with its interaction boundaries.
 *
 * Boundary `boundaries[i]` is the first frame generated under `prompts[i + 1]`;
 * segment 0 is the initial prompt. Immutable once constructed.
 */
class PromptSchedule {
public:
    /// Throws ValidationError (with a field path) when the invariants do not hold.
    PromptSchedule(std::vector<PromptEmbedding> prompts, std::vector<int> boundaries, int total_frames);

    const std::vector<PromptEmbedding>& prompts() const noexcept { return prompts_; }
    const std::vector<int>& boundaries() const noexcept { return boundaries_; }
    int total_frames() const noexcept { return total_frames_; }
    int d_model() const noexcept { return static_cast<int>(prompts_.front().vector.size()); }
    int segments() const noexcept { return static_cast<int>(prompts_.size()); }

    bool is_boundary(int t) const;

private:
    std::vector<PromptEmbedding> prompts_;
    std::vector<int> boundaries_;
    int total_frames_;
};

/// Number of boundaries at or before `t`; the active prompt is `prompts()[active_segment(t)]`.
int active_segment(const PromptSchedule& sched, int t);

/// Most recent boundary at or before `t`, or 0 before the first switch.
int last_boundary(const PromptSchedule& sched, int t);

/// Junction gate: a switch has happened and `last_boundary(t) + n_j <= t - w`.
bool junction_active(const PromptSchedule& sched, int t, int n_j, int w);

/// Variant of the gate for an explicit last switch (`has_switch == false` means none yet).
bool junction_active_for(bool has_switch, int switch_frame, int t, int n_j, int w);

/// Parses `{"d_model", "prompts": [{"seed"}], "boundaries", "total_frames"}`.
PromptSchedule schedule_from_json(const nlohmann::json& doc);
nlohmann::json schedule_to_json(const PromptSchedule& sched);

}  // namespace anchorkv
