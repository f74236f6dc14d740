// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace refdic {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input that fails before any schema check (e.g. invalid JSON).
// Carries the byte offset reported by the parser when one is available.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  explicit ParseError(const std::string& what) : Error(what), byte_offset_(0) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed input that violates a documented schema or invariant
// (duplicate ids, wrong value types, out-of-range fields, bad magic bytes).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A caption that normalizes to zero tokens.
class EmptyCaptionError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

// A referenced id (image, caption slot, graph, embedding) is not present.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Matrix or vector shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A ranking does not contain enough entries to satisfy a request.
class InsufficientCandidatesError : public Error {
 public:
  InsufficientCandidatesError(const std::string& what, std::size_t needed,
                              std::size_t available)
      : Error(what + ": needed " + std::to_string(needed) + ", available " +
              std::to_string(available)),
        needed_(needed),
        available_(available) {}

  std::size_t needed() const { return needed_; }
  std::size_t available() const { return available_; }

 private:
  std::size_t needed_;
  std::size_t available_;
};

// A numeric argument is outside the mathematical domain of an operation
// (non-positive probability, group size mismatch, mean of zero groups, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace refdic
