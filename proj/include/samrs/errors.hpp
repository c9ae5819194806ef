// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace samrs {

/// Root of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller asked for something the inputs cannot provide (e.g. an H-Box
/// prompt for an R-Box-only annotation). Maps to CLI exit status 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed annotation input. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Zero-area or self-intersecting box.
class DegenerateBoxError : public Error {
public:
    using Error::Error;
};

/// A mask prompt that would carry no positive cell.
class EmptyPromptError : public Error {
public:
    using Error::Error;
};

/// RLE counts inconsistent with the declared mask size.
class CorruptionError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class VersionError : public Error {
public:
    using Error::Error;
};

/// Output tree or manifest is inconsistent. Maps to CLI exit status 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Network-level failure talking to a backend; the call may be retried.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Backend answered, but not in the agreed wire format.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// mIOU over zero included samples.
class UndefinedResultError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Backend failures exceeded the configured share of prompted instances.
class FailureBudgetError : public Error {
public:
    using Error::Error;
};

/// The run was interrupted; finished work is checkpointed.
class CancelledError : public Error {
public:
    using Error::Error;
};

}  // namespace samrs
