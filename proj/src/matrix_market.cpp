#include "ddtrsv/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ddtrsv {

namespace {

using Kind = MatrixMarketError::Kind;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MatrixMarketError(Kind::malformed_header, "empty input");

  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    throw MatrixMarketError(Kind::malformed_header, "missing %%MatrixMarket matrix banner");
  if (lower(format) != "coordinate")
    throw MatrixMarketError(Kind::malformed_header, "only coordinate format is supported");
  field = lower(field);
  if (field != "real" && field != "double") {
    throw MatrixMarketError(Kind::unsupported_field, "unsupported field '" + field + "'");
  }
  symmetry = lower(symmetry);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw MatrixMarketError(Kind::malformed_header, "unsupported symmetry '" + symmetry + "'");

  do {
    if (!std::getline(in, line)) throw MatrixMarketError(Kind::malformed_header, "missing size line");
  } while (blank_or_comment(line));

  index_t nrows = 0, ncols = 0, entries = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> nrows >> ncols >> entries) || nrows < 0 || ncols < 0 || entries < 0)
      throw MatrixMarketError(Kind::malformed_header, "malformed size line '" + line + "'");
  }
  if (symmetric && nrows != ncols)
    throw MatrixMarketError(Kind::malformed_header, "symmetric matrix must be square");

  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  const std::size_t reserve = static_cast<std::size_t>(symmetric ? 2 * entries : entries);
  rows.reserve(reserve);
  cols.reserve(reserve);
  vals.reserve(reserve);

  index_t seen = 0;
  while (seen < entries && std::getline(in, line)) {
    if (blank_or_comment(line)) continue;
    // strtod/strtoll keep this tolerant of any whitespace layout.
    const char* p = line.c_str();
    char* end = nullptr;
    const long long r = std::strtoll(p, &end, 10);
    if (end == p) throw MatrixMarketError(Kind::malformed_entry, "bad entry '" + line + "'");
    p = end;
    const long long c = std::strtoll(p, &end, 10);
    if (end == p) throw MatrixMarketError(Kind::malformed_entry, "bad entry '" + line + "'");
    p = end;
    const double v = std::strtod(p, &end);
    if (end == p) throw MatrixMarketError(Kind::malformed_entry, "bad entry '" + line + "'");
    if (r < 1 || r > nrows || c < 1 || c > ncols) {
      throw MatrixMarketError(Kind::index_out_of_bounds,
                              "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                  ") outside " + std::to_string(nrows) + " x " + std::to_string(ncols));
    }
    rows.push_back(r - 1);
    cols.push_back(c - 1);
    vals.push_back(v);
    if (symmetric && r != c) {
      rows.push_back(c - 1);
      cols.push_back(r - 1);
      vals.push_back(v);
    }
    ++seen;
  }
  if (seen != entries) {
    throw MatrixMarketError(Kind::malformed_entry, "expected " + std::to_string(entries) +
                                                       " entries, found " + std::to_string(seen));
  }
  return from_triplets<1>(nrows, ncols, rows, cols, vals);
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError(Kind::io, "cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  char buf[32];
  for (index_t r = 0; r < a.rows(); ++r) {
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), a.values[k]);
      out << r + 1 << ' ' << a.col_idx[k] + 1 << ' ' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MatrixMarketError(Kind::io, "cannot write " + path.string());
  write_matrix_market(a, out);
  if (!out) throw MatrixMarketError(Kind::io, "write failed for " + path.string());
}

}  // namespace ddtrsv
