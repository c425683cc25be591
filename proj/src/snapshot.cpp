// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "anchorkv/engine.hpp"
#include "anchorkv/errors.hpp"

namespace anchorkv {

namespace {

constexpr const char* kSnapshotFormat = "anchorkv-snapshot";
constexpr int kSnapshotVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw StateError("snapshot matrix has inconsistent shape");
    }
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

nlohmann::json kv_to_json(const KVEntry& kv) {
    return {{"frame", kv.frame},
            {"keys", matrix_to_json(kv.keys)},
            {"values", matrix_to_json(kv.values)},
            {"prompt_segment", kv.prompt_segment},
            {"latent_checksum", kv.latent_checksum}};
}

KVEntry kv_from_json(const nlohmann::json& j) {
    KVEntry kv;
    kv.frame = j.at("frame").get<int>();
    kv.keys = matrix_from_json(j.at("keys"));
    kv.values = matrix_from_json(j.at("values"));
    kv.prompt_segment = j.at("prompt_segment").get<int>();
    kv.latent_checksum = j.at("latent_checksum").get<std::uint64_t>();
    return kv;
}

template <typename Range>
nlohmann::json kv_list(const Range& entries) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : entries) out.push_back(kv_to_json(e));
    return out;
}

nlohmann::json optional_int(const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<int> optional_int(const nlohmann::json& j) {
    return j.is_null() ? std::nullopt : std::optional<int>(j.get<int>());
}

}  // namespace

nlohmann::json Engine::snapshot() const {
    nlohmann::json latents = nlohmann::json::array();
    for (const auto& l : state_.latent_history) latents.push_back({{"frame", l.frame}, {"latent", matrix_to_json(l.latent)}});
    return {
        {"format", kSnapshotFormat},
        {"version", kSnapshotVersion},
        {"schedule", schedule_to_json(sched_)},
        {"config", engine_config_to_json(cfg_)},
        {"next_frame", next_frame()},
        {"cache",
         {{"sink", kv_list(state_.sink)},
          {"junction", kv_list(state_.junction)},
          {"junction_boundary", optional_int(state_.junction_boundary)},
          {"local", kv_list(state_.local)},
          {"latent_history", latents},
          {"frames_generated", state_.frames_generated}}},
        {"pending_boundary", optional_int(pending_boundary_)},
        {"pending_junction", kv_list(pending_junction_)},
    };
}

Engine Engine::restore(const nlohmann::json& snap) {
    if (snap.value("format", std::string()) != kSnapshotFormat) throw StateError("not an engine snapshot");
    if (snap.value("version", 0) != kSnapshotVersion) {
        throw StateError("unsupported snapshot version " + snap.value("version", nlohmann::json()).dump());
    }
    Engine engine(schedule_from_json(snap.at("schedule")), engine_config_from_json(snap.at("config")));

    const auto& c = snap.at("cache");
    CacheState state(engine.cfg_.cache);
    for (const auto& j : c.at("sink")) state.sink.push_back(kv_from_json(j));
    for (const auto& j : c.at("junction")) state.junction.push_back(kv_from_json(j));
    state.junction_boundary = optional_int(c.at("junction_boundary"));
    for (const auto& j : c.at("local")) state.local.push_back(kv_from_json(j));
    for (const auto& j : c.at("latent_history")) {
        state.latent_history.push_back({j.at("frame").get<int>(), matrix_from_json(j.at("latent"))});
    }
    state.frames_generated = c.at("frames_generated").get<int>();
    if (state.frames_generated != snap.at("next_frame").get<int>()) {
        throw StateError("snapshot next_frame disagrees with the cache state");
    }
    engine.state_ = std::move(state);
    engine.pending_boundary_ = optional_int(snap.at("pending_boundary"));
    for (const auto& j : snap.at("pending_junction")) engine.pending_junction_.push_back(kv_from_json(j));
    return engine;
}

}  // namespace anchorkv
