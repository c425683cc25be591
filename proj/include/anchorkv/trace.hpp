// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchorkv/engine.hpp"

namespace anchorkv {

// JSON-lines trace: one header line, then one FrameTrace per line.

nlohmann::json trace_header(const PromptSchedule& sched, const EngineConfig& cfg);
nlohmann::json trace_record(const FrameTrace& trace);
FrameTrace trace_from_json(const nlohmann::json& record);

void write_trace_header(std::ostream& out, const PromptSchedule& sched, const EngineConfig& cfg);
void write_trace_record(std::ostream& out, const FrameTrace& trace);

/// Malformed trace input; `line()` is 1-based.
class TraceParseError : public std::runtime_error {
public:
    TraceParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct InvariantResult {
    std::string invariant;
    std::size_t violations = 0;
    std::optional<int> first_line;
    std::optional<int> first_frame;
    std::string detail;

    bool pass() const noexcept { return violations == 0; }
};

struct CheckReport {
    std::vector<InvariantResult> results;

    bool all_pass() const;
    const InvariantResult& result(const std::string& invariant) const;
    std::string to_text() const;
};

/// Re-derives gating, windows and positions from the header and audits every record.
CheckReport check_trace(std::istream& in);

}  // namespace anchorkv
