// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "anchorkv/memory.hpp"
#include "anchorkv/model.hpp"
#include "anchorkv/rope.hpp"
#include "anchorkv/schedule.hpp"

namespace anchorkv {

/// Cache maintenance applied at a prompt switch.
enum class StrategyId { BaselineRecache, Flush, AnchorGuided };

std::string_view to_string(StrategyId s);  // "baseline" | "flush" | "anchor"
StrategyId strategy_from_string(std::string_view s);

/**
 * Recomputes the local window's KV from the retained latents under `new_prompt`.
 * Sink is untouched; the junction is dropped.
 */
CacheState recache_baseline(CacheState state, const PromptEmbedding& new_prompt, int new_segment,
                            const ToyModel& model);

/// Empties the local window and drops the junction. Sink is kept.
CacheState recache_flush(CacheState state);

/**
 * Anchor-guided re-cache at boundary `f`. Each retained latent is first passed once
 * through attention over the pre-switch anchor memory (the view frame `f` would have
 * seen under the previous segment, minus the frame itself), then its KV is recomputed
 * under `new_prompt`. The old junction is dropped; the engine refreshes it once frames
 * f .. f+N_J-1 exist.
 */
CacheState recache_anchor(CacheState state, const PromptEmbedding& new_prompt, int new_segment,
                          const ToyModel& model, const PromptSchedule& sched, int f, const RopeConfig& rope,
                          RopeMode mode);

}  // namespace anchorkv
