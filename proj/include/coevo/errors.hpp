#pragma once

#include <stdexcept>
#include <string>

namespace coevo {

/// Base for every failure caused by the input data (malformed files, too few
/// rows, degenerate partitions). The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class OrderingError : public DataError {
 public:
  using DataError::DataError;
};

class ValueError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

class SpecificationError : public DataError {
 public:
  using DataError::DataError;
};

class CoverageError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateDataError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyDataError : public DataError {
 public:
  using DataError::DataError;
};

// Training partition of a learning environment cannot be used.
class EnvironmentError : public DataError {
 public:
  using DataError::DataError;
};

/// Programming-contract violations: mismatched dimensions, bad encodings.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An MOEA run aborted (exit code 3 at the CLI).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coevo
