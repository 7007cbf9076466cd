#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dalmc {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values (NaN/Inf) where finite numbers are required.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch or otherwise impossible matrix shape.
class InvalidShape : public Error {
 public:
  using Error::Error;
};

// Solver / clustering configuration that violates its invariants.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// The optimization produced a non-finite objective.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, long iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  long iteration;
};

// Missing or unreadable file.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but its structure contradicts what was declared.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A cell that should be numeric is not; carries its location.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) + ", col " +
              std::to_string(col) + ")"),
        row(row),
        col(col) {}
  std::size_t row;
  std::size_t col;
};

}  // namespace dalmc
