#pragma once

#include <stdexcept>
#include <string>

namespace lcd {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File cannot be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bad magic or unsupported version in a binary file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Payload inconsistent with its header (truncated or oversized).
class CorruptionError : public Error {
 public:
  using Error::Error;
};

// Descriptor dimensionality does not match the expected value.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter to an algorithm.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong state (e.g. re-initializing a database).
class StateError : public Error {
 public:
  using Error::Error;
};

// Frame ids must be added strictly sequentially.
class SequenceError : public Error {
 public:
  using Error::Error;
};

// No descriptors available to fit on.
class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

// Geometric input admits no triangulation (all points collinear).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Fewer than three distinct points.
class InsufficientPointsError : public Error {
 public:
  using Error::Error;
};

// Homogeneous projection with a vanishing scale component.
class ProjectionAtInfinityError : public Error {
 public:
  using Error::Error;
};

// Training sequence too short to track features.
class InsufficientSequenceError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV input; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcd
