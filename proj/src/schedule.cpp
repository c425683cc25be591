// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/schedule.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "anchorkv/errors.hpp"

namespace anchorkv {

PromptEmbedding make_prompt_embedding(std::int64_t seed, int d_model) {
    if (d_model <= 0) {
        throw DimensionError("prompt embedding needs d_model > 0, got " + std::to_string(d_model));
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(d_model);
    for (int i = 0; i < d_model; ++i) v(i) = normal(rng);
    v.normalize();
    return {std::move(v), seed};
}

PromptSchedule::PromptSchedule(std::vector<PromptEmbedding> prompts, std::vector<int> boundaries, int total_frames)
    : prompts_(std::move(prompts)), boundaries_(std::move(boundaries)), total_frames_(total_frames) {
    if (total_frames_ < 1) throw ValidationError("total_frames", "must be >= 1");
    if (prompts_.empty()) throw ValidationError("prompts", "must contain at least one prompt");
    if (prompts_.size() != boundaries_.size() + 1) {
        throw ValidationError("prompts", "expected len(boundaries) + 1 = " + std::to_string(boundaries_.size() + 1) +
                                             " prompts, got " + std::to_string(prompts_.size()));
    }
    const auto dim = prompts_.front().vector.size();
    for (std::size_t i = 0; i < prompts_.size(); ++i) {
        const auto path = "prompts[" + std::to_string(i) + "]";
        if (prompts_[i].vector.size() != dim || dim == 0) throw ValidationError(path, "embedding dimension mismatch");
        if (!prompts_[i].vector.allFinite()) throw ValidationError(path, "embedding has non-finite entries");
    }
    for (std::size_t i = 0; i < boundaries_.size(); ++i) {
        const auto path = "boundaries[" + std::to_string(i) + "]";
        if (boundaries_[i] < 1) throw ValidationError(path, "must be >= 1");
        if (boundaries_[i] >= total_frames_) throw ValidationError(path, "must be < total_frames");
        if (i > 0 && boundaries_[i] <= boundaries_[i - 1]) throw ValidationError(path, "must be strictly increasing");
    }
}

bool PromptSchedule::is_boundary(int t) const {
    return std::binary_search(boundaries_.begin(), boundaries_.end(), t);
}

namespace {

void check_frame(const PromptSchedule& sched, int t) {
    if (t < 0 || t >= sched.total_frames()) {
        throw RangeError("frame " + std::to_string(t) + " outside [0, " + std::to_string(sched.total_frames()) + ")");
    }
}

}  // namespace

int active_segment(const PromptSchedule& sched, int t) {
    check_frame(sched, t);
    const auto& b = sched.boundaries();
    return static_cast<int>(std::upper_bound(b.begin(), b.end(), t) - b.begin());
}

int last_boundary(const PromptSchedule& sched, int t) {
    const int seg = active_segment(sched, t);
    return seg == 0 ? 0 : sched.boundaries()[seg - 1];
}

bool junction_active_for(bool has_switch, int switch_frame, int t, int n_j, int w) {
    if (n_j < 0) throw std::invalid_argument("n_j must be >= 0");
    if (w < 1) throw std::invalid_argument("w must be >= 1");
    return has_switch && switch_frame + n_j <= t - w;
}

bool junction_active(const PromptSchedule& sched, int t, int n_j, int w) {
    const int seg = active_segment(sched, t);
    return junction_active_for(seg > 0, last_boundary(sched, t), t, n_j, w);
}

namespace {

std::int64_t require_int(const nlohmann::json& doc, const std::string& key, const std::string& path) {
    if (!doc.contains(key)) throw ValidationError(path, "missing required field");
    const auto& v = doc.at(key);
    if (!v.is_number_integer()) throw ValidationError(path, "expected integer");
    return v.get<std::int64_t>();
}

int require_int32(const nlohmann::json& doc, const std::string& key, const std::string& path) {
    const auto v = require_int(doc, key, path);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ValidationError(path, "integer out of range");
    }
    return static_cast<int>(v);
}

}  // namespace

PromptSchedule schedule_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("$", "expected object");
    const int d_model = require_int32(doc, "d_model", "d_model");
    if (d_model < 1) throw ValidationError("d_model", "must be >= 1");
    const int total = require_int32(doc, "total_frames", "total_frames");

    if (!doc.contains("prompts")) throw ValidationError("prompts", "missing required field");
    const auto& jp = doc.at("prompts");
    if (!jp.is_array()) throw ValidationError("prompts", "expected array");
    std::vector<PromptEmbedding> prompts;
    for (std::size_t i = 0; i < jp.size(); ++i) {
        const auto path = "prompts[" + std::to_string(i) + "]";
        if (!jp[i].is_object()) throw ValidationError(path, "expected object");
        prompts.push_back(make_prompt_embedding(require_int(jp[i], "seed", path + ".seed"), d_model));
    }

    std::vector<int> boundaries;
    if (doc.contains("boundaries")) {
        const auto& jb = doc.at("boundaries");
        if (!jb.is_array()) throw ValidationError("boundaries", "expected array");
        for (std::size_t i = 0; i < jb.size(); ++i) {
            const auto path = "boundaries[" + std::to_string(i) + "]";
            if (!jb[i].is_number_integer()) throw ValidationError(path, "expected integer");
            const auto v = jb[i].get<std::int64_t>();
            if (v < 0 || v > std::numeric_limits<int>::max()) throw ValidationError(path, "integer out of range");
            boundaries.push_back(static_cast<int>(v));
        }
    } else {
        throw ValidationError("boundaries", "missing required field");
    }
    return PromptSchedule(std::move(prompts), std::move(boundaries), total);
}

nlohmann::json schedule_to_json(const PromptSchedule& sched) {
    nlohmann::json prompts = nlohmann::json::array();
    for (const auto& p : sched.prompts()) prompts.push_back({{"seed", p.seed}});
    return {{"d_model", sched.d_model()},
            {"prompts", prompts},
            {"boundaries", sched.boundaries()},
            {"total_frames", sched.total_frames()}};
}

}  // namespace anchorkv
