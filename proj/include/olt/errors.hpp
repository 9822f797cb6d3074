#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace olt {

/// Base class of all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-finite numbers, empty grids, unknown tags,
/// incompatible method/family combinations.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Category or threshold index outside its admissible range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A declared type or model invariant does not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Monotonicity requirement violated; indices identify the offending pair
/// (1-based, as in the threshold numbering).
class OrderingViolationError : public ValidationError {
 public:
  OrderingViolationError(const std::string& msg, std::size_t first, std::size_t second)
      : ValidationError(msg), first(first), second(second) {}

  std::size_t first;
  std::size_t second;
};

/// Structural invariant broken, e.g. a bit vector that is not of the form
/// (1,...,1,0,...,0).
class InvariantViolationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operation not defined for the given family or response function.
class UnsupportedOperationError : public Error {
 public:
  using Error::Error;
};

/// Conditioning event carries no usable probability mass.
class DegenerateConditionError : public Error {
 public:
  using Error::Error;
};

/// An item whose observed responses cannot identify its thresholds.
class DegenerateItemError : public Error {
 public:
  DegenerateItemError(const std::string& msg, std::string item_id,
                      std::vector<int> empty_categories)
      : Error(msg),
        item_id(std::move(item_id)),
        empty_categories(std::move(empty_categories)) {}

  std::string item_id;
  std::vector<int> empty_categories;
};

/// Text input (JSON/CSV) that could not be read; line/column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg), line(line), column(column) {}

  std::size_t line;
  std::size_t column;
};

}  // namespace olt
