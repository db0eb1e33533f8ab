// Copyright 2026 The Horus Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace horus {

enum class ErrorKind {
    Parse,       // malformed input text
    Schema,      // well-formed input that violates the expected shape
    Integrity,   // replay found the trace inconsistent with EVM semantics
    Io,
    Validation,  // bad configuration or arguments
    Provider,    // transfer provider failed
    Partial,     // work stopped early, partial output available
    Processing,  // one or more inputs failed in a batch run
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error parse_error(const std::string& m) { return {ErrorKind::Parse, m}; }
inline Error schema_error(const std::string& m) { return {ErrorKind::Schema, m}; }
inline Error integrity_error(const std::string& m) { return {ErrorKind::Integrity, m}; }
inline Error io_error(const std::string& m) { return {ErrorKind::Io, m}; }
inline Error validation_error(const std::string& m) { return {ErrorKind::Validation, m}; }

}  // namespace horus
