// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/engine.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "anchorkv/errors.hpp"

namespace anchorkv {

EngineConfig EngineConfig::for_d_model(int d_model) {
    EngineConfig cfg;
    cfg.model.d_model = d_model;
    cfg.rope.head_dim = cfg.model.head_dim();
    return cfg;
}

void EngineConfig::validate() const {
    model.validate();
    rope.validate();
    if (rope.head_dim != model.head_dim()) throw DimensionError("rope head_dim must equal the model head_dim");
    if (cache.sink < 0 || cache.junction < 0 || cache.window < 1) {
        throw std::invalid_argument("cache config needs sink >= 0, junction >= 0, window >= 1");
    }
    if (cache.window > rope.p_max) throw std::invalid_argument("window must not exceed p_max");
}

std::vector<std::string> EngineConfig::warnings() const {
    std::vector<std::string> out;
    if (cache.sink + cache.junction + cache.window > rope.p_max + cache.sink) {
        out.push_back("junction + window exceeds p_max; junction positions will overlap the sink band");
    }
    return out;
}

nlohmann::json engine_config_to_json(const EngineConfig& cfg) {
    return {
        {"cache", {{"sink", cfg.cache.sink}, {"junction", cfg.cache.junction}, {"window", cfg.cache.window}}},
        {"rope", {{"p_max", cfg.rope.p_max}, {"base", cfg.rope.base}, {"head_dim", cfg.rope.head_dim}}},
        {"model",
         {{"d_model", cfg.model.d_model},
          {"n_heads", cfg.model.n_heads},
          {"tokens_per_frame", cfg.model.tokens_per_frame},
          {"weight_seed", cfg.model.weight_seed}}},
        {"strategy", to_string(cfg.strategy)},
        {"rope_mode", to_string(cfg.rope_mode)},
        {"noise_seed", cfg.noise_seed},
        {"checked", cfg.checked},
    };
}

EngineConfig engine_config_from_json(const nlohmann::json& doc) {
    EngineConfig cfg;
    const auto& c = doc.at("cache");
    cfg.cache = {c.at("sink").get<int>(), c.at("junction").get<int>(), c.at("window").get<int>()};
    const auto& r = doc.at("rope");
    cfg.rope = {r.at("p_max").get<int>(), r.at("base").get<double>(), r.at("head_dim").get<int>()};
    const auto& m = doc.at("model");
    cfg.model = {m.at("d_model").get<int>(), m.at("n_heads").get<int>(), m.at("tokens_per_frame").get<int>(),
                 m.at("weight_seed").get<std::uint64_t>()};
    cfg.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
    cfg.rope_mode = rope_mode_from_string(doc.at("rope_mode").get<std::string>());
    cfg.noise_seed = doc.at("noise_seed").get<std::uint64_t>();
    cfg.checked = doc.at("checked").get<bool>();
    return cfg;
}

Engine::Engine(PromptSchedule sched, EngineConfig cfg)
    : sched_(std::move(sched)), cfg_(cfg), state_(cfg.cache) {
    cfg_.validate();
    if (sched_.d_model() != cfg_.model.d_model) {
        throw DimensionError("schedule d_model " + std::to_string(sched_.d_model()) + " != model d_model " +
                             std::to_string(cfg_.model.d_model));
    }
    model_ = std::make_shared<const ToyModel>(cfg_.model);
}

void Engine::on_boundary(int t) {
    const int seg = active_segment(sched_, t);
    const auto& prompt = sched_.prompts()[seg];
    pending_junction_.clear();
    pending_boundary_.reset();
    switch (cfg_.strategy) {
        case StrategyId::BaselineRecache:
            state_ = recache_baseline(std::move(state_), prompt, seg, *model_);
            break;
        case StrategyId::Flush:
            state_ = recache_flush(std::move(state_));
            if (cfg_.record_history) history_.flushes.push_back(t);
            break;
        case StrategyId::AnchorGuided:
            state_ = recache_anchor(std::move(state_), prompt, seg, *model_, sched_, t, cfg_.rope, cfg_.rope_mode);
            pending_boundary_ = t;
            break;
    }
}

void Engine::check(bool ok, const char* invariant, int t, const std::string& detail, FrameTrace& trace) const {
    if (ok) return;
    if (cfg_.checked) throw InvariantError(invariant, t, detail);
    trace.warnings.push_back(std::string(invariant) + ": " + detail);
}

void Engine::audit(const AnchorMemoryView& view, const PositionMap& map, FrameTrace& trace) const {
    const int t = view.t;
    const auto& cc = cfg_.cache;

    for (const auto& e : view.entries) {
        check(e.kv.frame < t, "causality", t, "view holds frame " + std::to_string(e.kv.frame), trace);
    }
    check(map.max_position() <= cfg_.rope.p_max, "position-bound", t,
          "max position " + std::to_string(map.max_position()) + " > " + std::to_string(cfg_.rope.p_max), trace);
    check(static_cast<int>(state_.retained_entries()) <= cc.capacity(), "memory-bound", t,
          std::to_string(state_.retained_entries()) + " entries retained", trace);

    bool sink_ok = static_cast<int>(state_.sink.size()) == std::min(cc.sink, t);
    for (std::size_t i = 0; sink_ok && i < state_.sink.size(); ++i) sink_ok = state_.sink[i].frame == static_cast<int>(i);
    check(sink_ok, "sink-fixed", t, "sink is not frames 0.." + std::to_string(std::min(cc.sink, t) - 1), trace);

    bool local_ok = static_cast<int>(state_.local.size()) <= cc.window;
    for (std::size_t i = 0; local_ok && i < state_.local.size(); ++i) {
        local_ok = state_.local[i].frame == t - static_cast<int>(state_.local.size()) + static_cast<int>(i);
    }
    check(local_ok, "local-window", t, "local frames are not contiguous up to t-1", trace);

    const int seg = active_segment(sched_, t);
    const int s = last_boundary(sched_, t);
    const bool delta = junction_active(sched_, t, cc.junction, cc.window);
    const auto junction_frames = view.count(Region::Junction);
    check(junction_frames == 0 || delta, "junction-gating", t, "junction present while gate is closed", trace);
    for (const auto& e : view.entries) {
        if (e.region == Region::Junction) {
            check(e.kv.frame >= s && e.kv.frame < s + cc.junction && e.kv.prompt_segment == seg, "junction-gating", t,
                  "junction frame " + std::to_string(e.kv.frame) + " does not belong to boundary " + std::to_string(s),
                  trace);
        }
    }
    if (cfg_.strategy == StrategyId::AnchorGuided && delta && cc.junction > 0) {
        bool covered = true;
        for (int f = s; f < s + cc.junction; ++f) covered = covered && view.contains(f);
        check(covered, "junction-gating", t, "gate open but junction frames are not all reachable", trace);
    }

    if (cfg_.rope_mode == RopeMode::TriRegion) {
        int max_sink = -1, min_junction = std::numeric_limits<int>::max(), min_local = std::numeric_limits<int>::max();
        for (const auto& e : map.entries) {
            if (e.region == Region::Sink) max_sink = std::max(max_sink, e.pos);
            if (e.region == Region::Junction) min_junction = std::min(min_junction, e.pos);
            if (e.region == Region::Local) min_local = std::min(min_local, e.pos);
        }
        const bool separated = junction_frames == 0 || min_junction > cc.sink - 1;
        bool ordered = true;
        if (separated) {
            const int lower = junction_frames > 0 ? min_junction : max_sink;
            if (junction_frames > 0) ordered = max_sink < min_junction;
            if (min_local != std::numeric_limits<int>::max()) {
                ordered = ordered && lower < min_local && min_local < map.query_position;
            }
        }
        check(ordered, "region-layout", t, "regions are not ordered sink < junction < local < query", trace);
    }
}

FrameTrace Engine::step() {
    const int t = next_frame();
    if (done()) throw RangeError("stream already produced all " + std::to_string(sched_.total_frames()) + " frames");

    if (sched_.is_boundary(t)) on_boundary(t);

    const int seg = active_segment(sched_, t);
    const auto& prompt = sched_.prompts()[seg];
    const AnchorMemoryView view = assemble(state_, t, sched_);
    const PositionMap map = assign_positions(view, cfg_.rope, cfg_.cache, cfg_.rope_mode);

    FrameTrace trace;
    trace.t = t;
    trace.segment = seg;
    trace.last_boundary = last_boundary(sched_, t);
    trace.delta = junction_active(sched_, t, cfg_.cache.junction, cfg_.cache.window);
    trace.entries = map.entries;
    trace.query_pos = map.query_position;
    trace.warnings = map.warnings;
    audit(view, map, trace);

    GeneratedFrame gen = generate_frame(*model_, view, map, prompt, seg, t, cfg_.noise_seed, cfg_.rope);
    trace.latent_norm = gen.latent.norm();
    trace.latent_checksum = gen.kv.latent_checksum;

    if (observer_) {
        const Matrix noise = seeded_noise(cfg_.model, t, cfg_.noise_seed);
        observer_(StepContext{t, view, map, noise, prompt, gen.latent});
    }

    if (cfg_.record_history) history_.frames.push_back(gen.kv);
    const KVEntry kv = gen.kv;
    state_ = push_frame(std::move(state_), std::move(gen.kv), std::move(gen.latent));

    if (pending_boundary_ && t < *pending_boundary_ + cfg_.cache.junction) pending_junction_.push_back(kv);
    if (pending_boundary_ && static_cast<int>(pending_junction_.size()) == cfg_.cache.junction) {
        if (cfg_.record_history) history_.refreshes.push_back({*pending_boundary_, pending_junction_});
        state_ = refresh_junction(std::move(state_), *pending_boundary_, std::move(pending_junction_));
        pending_junction_.clear();
        pending_boundary_.reset();
    }
    return trace;
}

std::vector<FrameTrace> run(const PromptSchedule& sched, const EngineConfig& cfg) {
    Engine engine(sched, cfg);
    std::vector<FrameTrace> out;
    out.reserve(sched.total_frames());
    while (!engine.done()) out.push_back(engine.step());
    return out;
}

}  // namespace anchorkv
