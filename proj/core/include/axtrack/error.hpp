// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace axtrack {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or configuration text.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A guarded computation would exceed its size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Synthetic scene could not be placed within the retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace axtrack
