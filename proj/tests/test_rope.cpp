// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anchorkv/rope.hpp"
#include "support.hpp"

using namespace anchorkv;

namespace {

const RopeConfig kRope{};  // p_max 21, base 1e4, head_dim 8
const CacheConfig kCache{};

Vector random_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

}  // namespace

TEST_CASE("rotate at position 0 is the identity") {
    std::mt19937_64 rng(1);
    const Vector v = random_vec(rng, 8);
    CHECK((rotate(v, 0, kRope) - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotate preserves norm and matches the complex-multiplication oracle") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Vector v = random_vec(rng, 8);
        const int pos = static_cast<int>(rng() % 500);
        const Vector r = rotate(v, pos, kRope);
        CHECK(r.norm() == doctest::Approx(v.norm()).epsilon(1e-12));
        const Matrix want = anchorkv::testing::complex_rotate(v.transpose(), pos, kRope.base);
        CHECK((r.transpose() - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("rotate rejects odd or mismatched dimensions and negative positions") {
    CHECK_THROWS_AS(rotate(Vector::Ones(7), 1, kRope), DimensionError);
    RopeConfig odd = kRope;
    odd.head_dim = 7;
    CHECK_THROWS_AS(rotate(Vector::Ones(7), 1, odd), DimensionError);
    CHECK_THROWS_AS(rotate(Vector::Ones(8), -1, kRope), RangeError);
}

TEST_CASE("rotated dot products depend only on relative position") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Vector q = random_vec(rng, 8);
        const Vector k = random_vec(rng, 8);
        CHECK(std::abs(rotate(q, 5, kRope).dot(rotate(k, 3, kRope)) - rotate(q, 9, kRope).dot(rotate(k, 7, kRope))) <
              1e-9);
        const int a = static_cast<int>(rng() % 200), b = static_cast<int>(rng() % 200), c = static_cast<int>(rng() % 200);
        CHECK(std::abs(rotate(q, a, kRope).dot(rotate(k, b, kRope)) -
                       rotate(q, a + c, kRope).dot(rotate(k, b + c, kRope))) < 1e-9);
    }
}

TEST_CASE("local_position follows latent index then the bounded re-index") {
    CHECK(local_position(0, 30, 9, kRope) == 12);
    CHECK(local_position(8, 30, 9, kRope) == 20);
    CHECK(local_position(0, 21, 9, kRope) == 12);
    // Offset k holds frame t - W + k: at t=15, k=8 is frame 14.
    CHECK(local_position(8, 15, 9, kRope) == 14);
    CHECK(local_position(0, 15, 9, kRope) == 6);
    CHECK(local_position(0, 3, 9, kRope) == 0);  // absent slot clamps
    CHECK_THROWS_AS(local_position(9, 30, 9, kRope), RangeError);
    CHECK_THROWS_AS(local_position(-1, 30, 9, kRope), RangeError);
}

TEST_CASE("junction_position sits N_J slots in front of local offset 0") {
    CHECK(junction_position(0, 30, 3, 9, kRope) == 9);
    CHECK(junction_position(2, 30, 3, 9, kRope) == 11);
    // t=24 >= P_max: local starts at 12, junction at 9.
    CHECK(junction_position(0, 24, 3, 9, kRope) == 9);
    // t=20 < P_max: local offset 0 is frame 11.
    CHECK(junction_position(0, 20, 3, 9, kRope) == 8);
    CHECK_THROWS_AS(junction_position(3, 30, 3, 9, kRope), RangeError);
}

TEST_CASE("tri-region layout at t=30 with an open junction gate") {
    std::vector<FrameSlot> slots{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink}};
    for (int f = 12; f <= 14; ++f) slots.push_back({f, Region::Junction});
    for (int f = 21; f <= 29; ++f) slots.push_back({f, Region::Local});
    const auto map = assign_positions(slots, 30, 12, kRope, kCache, RopeMode::TriRegion);

    std::vector<int> sink, junction, local;
    for (const auto& e : map.entries) {
        (e.region == Region::Sink ? sink : e.region == Region::Junction ? junction : local).push_back(e.pos);
    }
    CHECK(sink == std::vector<int>{0, 1, 2});
    CHECK(junction == std::vector<int>{9, 10, 11});
    CHECK(local == anchorkv::testing::iota(12, 20));
    CHECK(map.query_position == 21);
    CHECK(map.max_position() == 21);
    CHECK(map.warnings.empty());
}

TEST_CASE("before P_max every frame keeps its latent index") {
    std::vector<FrameSlot> slots{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink}};
    for (int f = 3; f <= 9; ++f) slots.push_back({f, Region::Local});
    for (auto mode : {RopeMode::TriRegion, RopeMode::Bounded, RopeMode::Unbounded}) {
        const auto map = assign_positions(slots, 10, std::nullopt, kRope, kCache, mode);
        for (const auto& e : map.entries) CHECK(e.pos == e.frame);
        CHECK(map.query_position == 10);
    }
}

TEST_CASE("bounded and unbounded baselines") {
    std::vector<FrameSlot> slots{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink}};
    for (int f = 91; f <= 99; ++f) slots.push_back({f, Region::Local});
    const auto unbounded = assign_positions(slots, 100, std::nullopt, kRope, kCache, RopeMode::Unbounded);
    CHECK(unbounded.query_position == 100);
    CHECK(unbounded.max_position() > kRope.p_max);

    const auto bounded = assign_positions(slots, 100, std::nullopt, kRope, kCache, RopeMode::Bounded);
    CHECK(bounded.query_position == 21);
    for (const auto& e : bounded.entries) CHECK(e.pos == std::min(e.frame, 21));
}

TEST_CASE("assign_positions rejects frames at or after t") {
    std::vector<FrameSlot> slots{{5, Region::Local}};
    CHECK_THROWS_AS(assign_positions(slots, 5, std::nullopt, kRope, kCache, RopeMode::TriRegion), StateError);
    std::vector<FrameSlot> stale{{2, Region::Local}};
    CHECK_THROWS_AS(assign_positions(stale, 30, std::nullopt, kRope, kCache, RopeMode::TriRegion), StateError);
    std::vector<FrameSlot> junction{{12, Region::Junction}};
    CHECK_THROWS_AS(assign_positions(junction, 30, std::nullopt, kRope, kCache, RopeMode::TriRegion), StateError);
}

TEST_CASE("collisions between junction and sink bands are surfaced as warnings") {
    // Switch at 1, gate open at t=13: junction {1,2,3} lands on positions 1..3.
    std::vector<FrameSlot> slots{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink}, {3, Region::Junction}};
    for (int f = 4; f <= 12; ++f) slots.push_back({f, Region::Local});
    const auto map = assign_positions(slots, 13, 1, kRope, kCache, RopeMode::TriRegion);
    CHECK(map.position_of(3) == 3);
    CHECK(map.warnings.empty());

    std::vector<FrameSlot> tight{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink},
                                 {3, Region::Junction}, {4, Region::Junction}};
    for (int f = 5; f <= 13; ++f) tight.push_back({f, Region::Local});
    CHECK(assign_positions(tight, 14, 2, kRope, kCache, RopeMode::TriRegion).warnings.empty());

    CacheConfig wide{3, 3, 9};
    std::vector<FrameSlot> overlap{{0, Region::Sink}, {1, Region::Sink}, {2, Region::Sink}, {1, Region::Junction}};
    const auto m2 = assign_positions(overlap, 13, 1, kRope, wide, RopeMode::TriRegion);
    CHECK_FALSE(m2.warnings.empty());
}

TEST_CASE("tri-region positions stay within the bound and ordered for every t") {
    for (int s = 1; s < 40; ++s) {
        for (int t = 0; t < 200; ++t) {
            std::vector<FrameSlot> slots;
            for (int f = 0; f < std::min(3, t); ++f) slots.push_back({f, Region::Sink});
            const bool gate = s + 3 <= t - 9;
            if (gate) {
                for (int f = s; f < s + 3; ++f) {
                    if (f >= 3) slots.push_back({f, Region::Junction});
                }
            }
            for (int f = std::max({0, t - 9, 3}); f < t; ++f) slots.push_back({f, Region::Local});
            const auto map = assign_positions(slots, t, gate ? std::optional<int>(s) : std::nullopt, kRope, kCache,
                                              RopeMode::TriRegion);
            CHECK(map.max_position() <= 21);

            int prev_frame[3] = {-1, -1, -1}, prev_pos[3] = {-1, -1, -1};
            for (const auto& e : map.entries) {
                const int r = static_cast<int>(e.region);
                if (prev_frame[r] >= 0) CHECK(e.pos > prev_pos[r]);
                prev_frame[r] = e.frame;
                prev_pos[r] = e.pos;
            }
            if (prev_frame[2] >= 0) CHECK(prev_pos[2] < map.query_position);
        }
    }
}
