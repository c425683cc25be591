// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anchorkv/engine.hpp"
#include "anchorkv/recache.hpp"
#include "support.hpp"

using namespace anchorkv;
using anchorkv::testing::frames_in;
using anchorkv::testing::iota;
using anchorkv::testing::make_schedule;

namespace {

/// Engine advanced to just before frame `t` (no boundary handling for t yet).
Engine engine_before(const PromptSchedule& sched, StrategyId s, int t) {
    auto cfg = EngineConfig::for_d_model(32);
    cfg.strategy = s;
    cfg.record_history = true;
    Engine e(sched, cfg);
    while (e.next_frame() < t) e.step();
    return e;
}

}  // namespace

TEST_CASE("strategy names round-trip") {
    for (auto s : {StrategyId::BaselineRecache, StrategyId::Flush, StrategyId::AnchorGuided}) {
        CHECK(strategy_from_string(to_string(s)) == s);
    }
    CHECK_THROWS(strategy_from_string("memflow"));
}

TEST_CASE("baseline re-cache recomputes local KV under the new prompt") {
    const auto sched = make_schedule({12}, 40);
    auto e = engine_before(sched, StrategyId::BaselineRecache, 12);
    const CacheState before = e.cache();
    const auto after = recache_baseline(before, sched.prompts()[1], 1, e.model());

    REQUIRE(after.local.size() == before.local.size());
    for (std::size_t i = 0; i < after.local.size(); ++i) {
        CHECK(after.local[i].frame == before.local[i].frame);
        CHECK(after.local[i].prompt_segment == 1);
        CHECK((after.local[i].keys - before.local[i].keys).norm() > 1e-6);
        CHECK(after.local[i].latent_checksum == before.local[i].latent_checksum);
    }
    CHECK(after.sink.size() == before.sink.size());
    for (std::size_t i = 0; i < after.sink.size(); ++i) CHECK(after.sink[i].keys == before.sink[i].keys);
    CHECK(after.junction.empty());
}

TEST_CASE("baseline re-cache needs the retained latents") {
    const auto sched = make_schedule({12}, 40);
    auto e = engine_before(sched, StrategyId::BaselineRecache, 12);
    CacheState broken = e.cache();
    broken.latent_history.pop_front();
    CHECK_THROWS_AS(recache_baseline(broken, sched.prompts()[1], 1, e.model()), StateError);
}

TEST_CASE("flush keeps only the sink") {
    const auto sched = make_schedule({12}, 40);
    auto e = engine_before(sched, StrategyId::Flush, 12);
    const auto after = recache_flush(e.cache());
    CHECK(after.local.empty());
    CHECK(after.junction.empty());
    CHECK(after.sink.size() == 3);

    const auto view = assemble(after, 12, sched);
    CHECK(view.entries.size() == 3);
    CHECK(view.count(Region::Sink) == 3);

    // Local grows by one per frame after the flush, up to W.
    e.step();
    for (int t = 13; t < 40; ++t) {
        CHECK(static_cast<int>(e.cache().local.size()) == std::min(t - 12, 9));
        for (const auto& kv : e.cache().local) CHECK(kv.prompt_segment == 1);
        e.step();
    }
}

TEST_CASE("anchor re-cache warm-starts from the pre-switch anchor memory") {
    const auto sched = make_schedule({12}, 40);
    auto e = engine_before(sched, StrategyId::AnchorGuided, 12);
    const CacheState before = e.cache();
    const auto baseline = recache_baseline(before, sched.prompts()[1], 1, e.model());
    const auto anchored = recache_anchor(before, sched.prompts()[1], 1, e.model(), sched, 12, RopeConfig{},
                                         RopeMode::TriRegion);
    REQUIRE(anchored.local.size() == baseline.local.size());
    for (std::size_t i = 0; i < anchored.local.size(); ++i) {
        CHECK(anchored.local[i].frame == baseline.local[i].frame);
        CHECK(anchored.local[i].prompt_segment == 1);
        CHECK((anchored.local[i].keys - baseline.local[i].keys).norm() > 1e-6);
    }
    CHECK(anchored.junction.empty());

    CHECK_THROWS_AS(recache_anchor(before, sched.prompts()[1], 1, e.model(), sched, 11, RopeConfig{},
                                   RopeMode::TriRegion),
                    StateError);
    auto late = engine_before(sched, StrategyId::AnchorGuided, 14);
    CHECK_THROWS_AS(recache_anchor(late.cache(), sched.prompts()[1], 1, late.model(), sched, 12, RopeConfig{},
                                   RopeMode::TriRegion),
                    StateError);
}

TEST_CASE("anchor junction is refreshed with the first N_J post-switch frames") {
    const auto sched = make_schedule({12}, 40);
    auto e = engine_before(sched, StrategyId::AnchorGuided, 15);
    std::vector<int> frames;
    for (const auto& kv : e.cache().junction) {
        frames.push_back(kv.frame);
        CHECK(kv.prompt_segment == 1);
    }
    CHECK(frames == std::vector<int>{12, 13, 14});
    CHECK(e.cache().junction_boundary == 12);
}

TEST_CASE("evidence retention at f + W + N_J + 5") {
    const int f = 12;
    const int probe = f + 9 + 3 + 5;
    const auto sched = make_schedule({f}, 60);
    for (auto s : {StrategyId::AnchorGuided, StrategyId::BaselineRecache, StrategyId::Flush}) {
        auto e = engine_before(sched, s, probe);
        const auto view = assemble(e.cache(), probe, sched);
        int retained = 0;
        for (int fr = f; fr < f + 3; ++fr) retained += view.contains(fr) ? 1 : 0;
        CHECK(retained == (s == StrategyId::AnchorGuided ? 3 : 0));
        if (s == StrategyId::AnchorGuided) CHECK(frames_in(view, Region::Junction) == iota(12, 14));

        const auto oracle = reconstruct_oracle(e.history(), probe, sched, e.config().cache);
        CHECK(anchorkv::testing::frame_regions(view) == anchorkv::testing::frame_regions(oracle));
    }
}

TEST_CASE("strategies never fire without a boundary") {
    const auto sched = make_schedule({}, 50);
    const auto base = EngineConfig::for_d_model(32);
    auto cfg_a = base, cfg_b = base, cfg_f = base;
    cfg_a.strategy = StrategyId::AnchorGuided;
    cfg_b.strategy = StrategyId::BaselineRecache;
    cfg_f.strategy = StrategyId::Flush;
    const auto a = run(sched, cfg_a);
    CHECK(a == run(sched, cfg_b));
    CHECK(a == run(sched, cfg_f));
}

TEST_CASE("sink is identical across strategies") {
    const auto sched = make_schedule({2, 20, 33}, 60);
    std::vector<std::vector<KVEntry>> sinks;
    for (auto s : {StrategyId::AnchorGuided, StrategyId::BaselineRecache, StrategyId::Flush}) {
        sinks.push_back(engine_before(sched, s, 60).cache().sink);
    }
    for (std::size_t i = 1; i < sinks.size(); ++i) {
        REQUIRE(sinks[i].size() == sinks[0].size());
        for (std::size_t k = 0; k < sinks[0].size(); ++k) {
            CHECK(sinks[i][k].frame == sinks[0][k].frame);
            CHECK(sinks[i][k].keys == sinks[0][k].keys);
        }
    }
}
