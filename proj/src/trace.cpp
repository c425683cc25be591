// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "anchorkv/errors.hpp"

namespace anchorkv {

namespace {

constexpr const char* kTraceFormat = "anchorkv-trace";
constexpr int kTraceVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos) {
        throw std::invalid_argument("latent_checksum must be 16 lowercase hex digits");
    }
    return std::stoull(s, nullptr, 16);
}

}  // namespace

nlohmann::json trace_header(const PromptSchedule& sched, const EngineConfig& cfg) {
    return {{"type", "header"},
            {"format", kTraceFormat},
            {"version", kTraceVersion},
            {"schedule", schedule_to_json(sched)},
            {"config", engine_config_to_json(cfg)},
            {"warnings", cfg.warnings()}};
}

nlohmann::json trace_record(const FrameTrace& trace) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : trace.entries) {
        entries.push_back({{"frame", e.frame}, {"region", to_string(e.region)}, {"pos", e.pos}});
    }
    return {{"t", trace.t},
            {"segment", trace.segment},
            {"s", trace.last_boundary},
            {"delta", trace.delta},
            {"entries", entries},
            {"query_pos", trace.query_pos},
            {"latent_norm", trace.latent_norm},
            {"latent_checksum", hex64(trace.latent_checksum)},
            {"warnings", trace.warnings}};
}

FrameTrace trace_from_json(const nlohmann::json& j) {
    FrameTrace tr;
    tr.t = j.at("t").get<int>();
    tr.segment = j.at("segment").get<int>();
    tr.last_boundary = j.at("s").get<int>();
    tr.delta = j.at("delta").get<bool>();
    for (const auto& e : j.at("entries")) {
        tr.entries.push_back(
            {e.at("frame").get<int>(), region_from_string(e.at("region").get<std::string>()), e.at("pos").get<int>()});
    }
    tr.query_pos = j.at("query_pos").get<int>();
    tr.latent_norm = j.at("latent_norm").get<double>();
    tr.latent_checksum = parse_hex64(j.at("latent_checksum").get<std::string>());
    tr.warnings = j.at("warnings").get<std::vector<std::string>>();
    return tr;
}

void write_trace_header(std::ostream& out, const PromptSchedule& sched, const EngineConfig& cfg) {
    out << trace_header(sched, cfg).dump() << '\n';
}

void write_trace_record(std::ostream& out, const FrameTrace& trace) { out << trace_record(trace).dump() << '\n'; }

bool CheckReport::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.pass(); });
}

const InvariantResult& CheckReport::result(const std::string& invariant) const {
    for (const auto& r : results) {
        if (r.invariant == invariant) return r;
    }
    throw std::out_of_range("no invariant named " + invariant);
}

std::string CheckReport::to_text() const {
    std::ostringstream os;
    for (const auto& r : results) {
        os << (r.pass() ? "PASS " : "FAIL ") << r.invariant;
        if (!r.pass()) {
            os << " violations=" << r.violations;
            if (r.first_line) os << " first_line=" << *r.first_line;
            if (r.first_frame) os << " first_t=" << *r.first_frame;
            if (!r.detail.empty()) os << " (" << r.detail << ")";
        }
        os << '\n';
    }
    return os.str();
}

namespace {

class Auditor {
public:
    Auditor(const PromptSchedule& sched, const EngineConfig& cfg) : sched_(sched), cfg_(cfg) {
        for (const char* name :
             {"record-sequence", "schedule-consistency", "position-bound", "window-membership", "region-layout"}) {
            report_.results.push_back({name, 0, std::nullopt, std::nullopt, {}});
        }
    }

    void record(int line, int index, const FrameTrace& tr) {
        if (tr.t != index || tr.t < 0 || tr.t >= sched_.total_frames()) {
            fail("record-sequence", line, tr.t, "expected t=" + std::to_string(index));
            return;
        }
        const int t = tr.t;
        const auto& cc = cfg_.cache;
        const int s = last_boundary(sched_, t);
        const bool delta = junction_active(sched_, t, cc.junction, cc.window);

        if (tr.segment != active_segment(sched_, t) || tr.last_boundary != s || tr.delta != delta) {
            fail("schedule-consistency", line, t, "segment/s/delta disagree with the schedule");
        }

        int max_pos = tr.query_pos;
        for (const auto& e : tr.entries) max_pos = std::max(max_pos, e.pos);
        if (max_pos > cfg_.rope.p_max) {
            fail("position-bound", line, t,
                 "max position " + std::to_string(max_pos) + " > " + std::to_string(cfg_.rope.p_max));
        }

        check_membership(line, t, s, delta, tr);
        check_layout(line, t, s, tr);
    }

    void finish(int line, int records) {
        if (records != sched_.total_frames()) {
            fail("record-sequence", line, records,
                 std::to_string(records) + " records for " + std::to_string(sched_.total_frames()) + " frames");
        }
    }

    CheckReport take() { return std::move(report_); }

private:
    void fail(const std::string& invariant, int line, int t, const std::string& detail) {
        for (auto& r : report_.results) {
            if (r.invariant != invariant) continue;
            if (r.violations++ == 0) {
                r.first_line = line;
                r.first_frame = t;
                r.detail = detail;
            }
        }
    }

    void check_membership(int line, int t, int s, bool delta, const FrameTrace& tr) {
        const auto& cc = cfg_.cache;
        std::vector<int> sink, junction, local;
        for (const auto& e : tr.entries) {
            (e.region == Region::Sink ? sink : e.region == Region::Junction ? junction : local).push_back(e.frame);
        }
        std::sort(sink.begin(), sink.end());
        std::sort(local.begin(), local.end());

        bool ok = static_cast<int>(sink.size()) == std::min(cc.sink, t);
        for (std::size_t i = 0; ok && i < sink.size(); ++i) ok = sink[i] == static_cast<int>(i);
        ok = ok && static_cast<int>(local.size()) <= cc.window;
        for (std::size_t i = 0; ok && i < local.size(); ++i) {
            ok = local[i] == t - static_cast<int>(local.size()) + static_cast<int>(i);
        }
        if (!ok) {
            fail("window-membership", line, t, "sink or local frames do not match the rolling window");
            return;
        }

        const bool anchor = cfg_.strategy == StrategyId::AnchorGuided;
        if (!junction.empty() && (!anchor || !delta)) {
            fail("window-membership", line, t, "junction present without an open gate");
            return;
        }
        for (int f : junction) {
            if (f < s || f >= s + cc.junction) {
                fail("window-membership", line, t, "junction frame " + std::to_string(f) + " outside boundary " +
                                                       std::to_string(s));
                return;
            }
        }
        if (anchor && delta) {
            for (int f = s; f < s + cc.junction; ++f) {
                const bool present = std::find(junction.begin(), junction.end(), f) != junction.end() ||
                                     std::binary_search(sink.begin(), sink.end(), f);
                if (!present) {
                    fail("window-membership", line, t, "junction frame " + std::to_string(f) + " missing");
                    return;
                }
            }
        }
    }

    void check_layout(int line, int t, int s, const FrameTrace& tr) {
        std::vector<FrameSlot> slots;
        bool has_junction = false;
        for (const auto& e : tr.entries) {
            slots.push_back({e.frame, e.region});
            has_junction = has_junction || e.region == Region::Junction;
        }
        PositionMap expected;
        try {
            expected = assign_positions(slots, t, has_junction ? std::optional<int>(s) : std::nullopt, cfg_.rope,
                                        cfg_.cache, cfg_.rope_mode);
        } catch (const std::exception& ex) {
            fail("region-layout", line, t, ex.what());
            return;
        }
        if (expected.query_position != tr.query_pos) {
            fail("region-layout", line, t,
                 "query_pos " + std::to_string(tr.query_pos) + " != " + std::to_string(expected.query_position));
            return;
        }
        for (std::size_t i = 0; i < tr.entries.size(); ++i) {
            if (expected.entries[i].pos != tr.entries[i].pos) {
                fail("region-layout", line, t,
                     "frame " + std::to_string(tr.entries[i].frame) + " at pos " + std::to_string(tr.entries[i].pos) +
                         ", expected " + std::to_string(expected.entries[i].pos));
                return;
            }
        }
    }

    const PromptSchedule& sched_;
    const EngineConfig& cfg_;
    CheckReport report_;
};

}  // namespace

CheckReport check_trace(std::istream& in) {
    std::string text;
    int line = 0;

    auto parse = [&](const std::string& s) {
        try {
            return nlohmann::json::parse(s);
        } catch (const nlohmann::json::exception& ex) {
            throw TraceParseError(line, std::string("invalid JSON: ") + ex.what());
        }
    };

    if (!std::getline(in, text)) throw TraceParseError(1, "empty trace");
    ++line;
    const auto header = parse(text);
    if (!header.is_object() || header.value("type", "") != "header" || header.value("format", "") != kTraceFormat) {
        throw TraceParseError(line, "first line is not a trace header");
    }
    if (header.value("version", 0) != kTraceVersion) throw TraceParseError(line, "unsupported trace version");

    std::optional<PromptSchedule> sched;
    EngineConfig cfg;
    try {
        sched.emplace(schedule_from_json(header.at("schedule")));
        cfg = engine_config_from_json(header.at("config"));
        cfg.validate();
    } catch (const std::exception& ex) {
        throw TraceParseError(line, std::string("bad header: ") + ex.what());
    }

    Auditor auditor(*sched, cfg);
    int index = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        const auto j = parse(text);
        FrameTrace tr;
        try {
            tr = trace_from_json(j);
        } catch (const std::exception& ex) {
            throw TraceParseError(line, std::string("bad record: ") + ex.what());
        }
        auditor.record(line, index++, tr);
    }
    auditor.finish(line + 1, index);
    return auditor.take();
}

}  // namespace anchorkv
