// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ocnerf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent dimensions or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API used out of order (e.g. backward on a stale forward cache).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A file is missing or unreadable. The message names the file.
class LoadError : public Error {
 public:
  LoadError(const std::string& file, const std::string& what)
      : Error(file + ": " + what), file_(file) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

/// Loaded data violates an invariant of its type.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ocnerf
