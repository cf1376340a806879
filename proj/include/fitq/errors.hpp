// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fitq {

/// Base of every error the core library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (non-finite gap, response not in {0,1}, probability at a boundary).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated (empty history, lo >= hi, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to converge or left its admissible range.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A configuration is internally inconsistent or cannot be parsed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fitq
