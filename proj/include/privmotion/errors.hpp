// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace privmotion {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix shapes; the message names both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (rates, counts, unknown keys, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (missing gradient, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; the message carries file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or truncated binary container; the message carries the byte offset.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint-level problems: missing file, wrong stage, missing parameter.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures surfaced with the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace privmotion
