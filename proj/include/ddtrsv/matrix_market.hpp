#pragma once

#include <filesystem>
#include <iosfwd>

#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

class MatrixMarketError : public Error {
 public:
  enum class Kind {
    io,                   // file cannot be opened or read
    malformed_header,     // missing or unrecognized %%MatrixMarket banner / size line
    unsupported_field,    // complex, integer or pattern data
    malformed_entry,      // entry line that does not parse, or wrong entry count
    index_out_of_bounds,  // coordinate outside the declared size
  };

  MatrixMarketError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Reads a real coordinate Matrix Market file (general or symmetric).
/// Symmetric storage is expanded, duplicates are summed, and explicit zeros
/// stay in the pattern.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes "coordinate real general", 1-based, rows in order, with enough
/// digits that reading the file back reproduces every value exactly.
void write_matrix_market(const CsrMatrix& a, std::ostream& out);
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);

}  // namespace ddtrsv
