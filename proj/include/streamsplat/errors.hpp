// Copyright (c) 2026 streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamsplat {

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed persisted data; carries the byte offset where parsing failed.
struct FormatError : std::runtime_error {
    FormatError(const std::string& what, size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    size_t byte_offset;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyBankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedCoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedLossError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss part; message names the offending part.
struct PropagationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace streamsplat
