#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ddtrsv {

using index_t = std::int64_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree, or index arithmetic would overflow.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A matrix violates the sorted/bounded CSR structure.
class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

/// A row depends on a row owned by another subdomain.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  enum class Kind { missing_diagonal, zero_pivot, singular_pivot_block };

  FactorizationError(Kind kind, index_t row, const std::string& what)
      : Error(what), kind_(kind), row_(row) {}

  Kind kind() const noexcept { return kind_; }
  index_t row() const noexcept { return row_; }

 private:
  Kind kind_;
  index_t row_;
};

}  // namespace ddtrsv
