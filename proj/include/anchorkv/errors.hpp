// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace anchorkv {

/// Index outside the valid frame or offset range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Vector or matrix with the wrong shape for the configured model.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Frames pushed out of order.
class SequenceError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Junction refresh with the wrong count or non-contiguous frames.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cache state that cannot serve the requested frame.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Input document rejected by validation; `path()` names the offending field.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string path, const std::string& constraint)
        : std::invalid_argument(path + ": " + constraint), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Checked-mode invariant breach during a streaming run.
class InvariantError : public std::runtime_error {
public:
    InvariantError(std::string invariant, int frame, const std::string& detail)
        : std::runtime_error("invariant '" + invariant + "' violated at t=" + std::to_string(frame) +
                             (detail.empty() ? std::string() : ": " + detail)),
          invariant_(std::move(invariant)),
          frame_(frame) {}

    const std::string& invariant() const noexcept { return invariant_; }
    int frame() const noexcept { return frame_; }

private:
    std::string invariant_;
    int frame_;
};

}  // namespace anchorkv
