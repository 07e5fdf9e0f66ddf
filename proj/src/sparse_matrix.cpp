#include "ddtrsv/sparse_matrix.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

namespace {

// Rows per parallel task in spmv.
constexpr index_t kSpmvChunk = 2048;

index_t checked_mul(index_t a, index_t b) {
  index_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw DimensionError("index arithmetic overflow");
  return out;
}

}  // namespace

template <int B>
index_t BlockSparseMatrix<B>::find(index_t row, index_t col) const {
  const auto first = col_idx.begin() + row_ptr[row];
  const auto last = col_idx.begin() + row_ptr[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return -1;
  return static_cast<index_t>(it - col_idx.begin());
}

template <int B>
void validate(const BlockSparseMatrix<B>& a) {
  if (a.n_block_rows < 0 || a.n_block_cols < 0) throw InvalidMatrix("negative dimension");
  if (static_cast<index_t>(a.row_ptr.size()) != a.n_block_rows + 1)
    throw InvalidMatrix("row_ptr length " + std::to_string(a.row_ptr.size()) + " != rows + 1");
  if (a.row_ptr.front() != 0) throw InvalidMatrix("row_ptr[0] != 0");
  if (a.row_ptr.back() != a.nnz_blocks()) throw InvalidMatrix("row_ptr[rows] != nnz");
  if (static_cast<index_t>(a.values.size()) != a.nnz())
    throw InvalidMatrix("values length does not match stored blocks");
  for (index_t r = 0; r < a.n_block_rows; ++r) {
    if (a.row_ptr[r + 1] < a.row_ptr[r])
      throw InvalidMatrix("row_ptr decreases at row " + std::to_string(r));
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const index_t c = a.col_idx[k];
      if (c < 0 || c >= a.n_block_cols)
        throw InvalidMatrix("column " + std::to_string(c) + " out of range in row " + std::to_string(r));
      if (k > a.row_ptr[r] && a.col_idx[k - 1] >= c)
        throw InvalidMatrix("columns not strictly increasing in row " + std::to_string(r));
    }
  }
}

template <int B>
bool is_valid(const BlockSparseMatrix<B>& a) noexcept {
  try {
    validate(a);
    return true;
  } catch (const InvalidMatrix&) {
    return false;
  }
}

template <int B>
BlockSparseMatrix<B> from_triplets(index_t n_block_rows, index_t n_block_cols,
                                   std::span<const index_t> rows, std::span<const index_t> cols,
                                   std::span<const double> values) {
  constexpr int bs = B * B;
  const auto n = static_cast<index_t>(rows.size());
  if (static_cast<index_t>(cols.size()) != n || static_cast<index_t>(values.size()) != n * bs)
    throw DimensionError("triplet arrays have inconsistent lengths");

  std::vector<index_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), index_t{0});
  for (index_t t = 0; t < n; ++t) {
    if (rows[t] < 0 || rows[t] >= n_block_rows || cols[t] < 0 || cols[t] >= n_block_cols)
      throw DimensionError("triplet coordinate out of range");
  }
  std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
  });

  BlockSparseMatrix<B> out;
  out.n_block_rows = n_block_rows;
  out.n_block_cols = n_block_cols;
  out.row_ptr.assign(static_cast<std::size_t>(n_block_rows + 1), 0);
  out.col_idx.reserve(static_cast<std::size_t>(n));
  out.values.reserve(static_cast<std::size_t>(n * bs));
  index_t last_row = -1;
  index_t last_col = -1;
  for (index_t t : order) {
    if (rows[t] == last_row && cols[t] == last_col) {
      double* dst = out.values.data() + out.values.size() - bs;
      for (int e = 0; e < bs; ++e) dst[e] += values[t * bs + e];
      continue;
    }
    out.col_idx.push_back(cols[t]);
    out.values.insert(out.values.end(), values.begin() + t * bs, values.begin() + (t + 1) * bs);
    ++out.row_ptr[rows[t] + 1];
    last_row = rows[t];
    last_col = cols[t];
  }
  std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
  return out;
}

template <int B>
BlockSparseMatrix<B> identity_matrix(index_t n_block_rows) {
  BlockSparseMatrix<B> out;
  out.n_block_rows = out.n_block_cols = n_block_rows;
  out.row_ptr.resize(static_cast<std::size_t>(n_block_rows + 1));
  std::iota(out.row_ptr.begin(), out.row_ptr.end(), index_t{0});
  out.col_idx.resize(static_cast<std::size_t>(n_block_rows));
  std::iota(out.col_idx.begin(), out.col_idx.end(), index_t{0});
  out.values.assign(static_cast<std::size_t>(n_block_rows * B * B), 0.0);
  for (index_t r = 0; r < n_block_rows; ++r)
    for (int d = 0; d < B; ++d) out.values[r * B * B + d * B + d] = 1.0;
  return out;
}

template <int B>
void spmv(const BlockSparseMatrix<B>& a, std::span<const double> x, std::span<double> y,
          WorkerPool* pool) {
  if (static_cast<index_t>(x.size()) != a.cols() || static_cast<index_t>(y.size()) != a.rows())
    throw DimensionError("spmv operand length mismatch");
  const index_t chunks = (a.n_block_rows + kSpmvChunk - 1) / kSpmvChunk;
  auto body = [&](index_t chunk) {
    const index_t first = chunk * kSpmvChunk;
    const index_t last = std::min(a.n_block_rows, first + kSpmvChunk);
    for (index_t r = first; r < last; ++r) {
      double acc[B] = {};
      for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
        const double* blk = a.values.data() + k * B * B;
        const double* xs = x.data() + a.col_idx[k] * B;
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < B; ++j) acc[i] += blk[i * B + j] * xs[j];
      }
      for (int i = 0; i < B; ++i) y[r * B + i] = acc[i];
    }
  };
  for_each_index(pool, chunks, body);
}

template <int B>
DenseVector spmv(const BlockSparseMatrix<B>& a, std::span<const double> x, WorkerPool* pool) {
  DenseVector y(static_cast<std::size_t>(a.rows()));
  spmv(a, x, std::span<double>(y), pool);
  return y;
}

CsrMatrix bsr_to_csr(const BsrMatrix& a) {
  CsrMatrix out;
  out.n_block_rows = a.rows();
  out.n_block_cols = a.cols();
  out.row_ptr.resize(static_cast<std::size_t>(out.n_block_rows + 1));
  out.row_ptr[0] = 0;
  out.col_idx.resize(static_cast<std::size_t>(a.nnz()));
  out.values.resize(static_cast<std::size_t>(a.nnz()));
  index_t pos = 0;
  for (index_t br = 0; br < a.n_block_rows; ++br) {
    for (int i = 0; i < 3; ++i) {
      for (index_t k = a.row_ptr[br]; k < a.row_ptr[br + 1]; ++k) {
        for (int j = 0; j < 3; ++j) {
          out.col_idx[pos] = a.col_idx[k] * 3 + j;
          out.values[pos] = a.values[k * 9 + i * 3 + j];
          ++pos;
        }
      }
      out.row_ptr[br * 3 + i + 1] = pos;
    }
  }
  return out;
}

BsrMatrix csr_to_bsr(const CsrMatrix& a) {
  if (a.rows() % 3 != 0 || a.cols() % 3 != 0)
    throw DimensionError("csr_to_bsr needs dimensions divisible by 3");
  BsrMatrix out;
  out.n_block_rows = a.rows() / 3;
  out.n_block_cols = a.cols() / 3;
  out.row_ptr.assign(static_cast<std::size_t>(out.n_block_rows + 1), 0);
  std::vector<index_t> slot(static_cast<std::size_t>(out.n_block_cols), -1);
  for (index_t br = 0; br < out.n_block_rows; ++br) {
    const index_t first_block = out.nnz_blocks();
    std::vector<index_t> cols;
    for (int i = 0; i < 3; ++i) {
      const index_t r = br * 3 + i;
      for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
        const index_t bc = a.col_idx[k] / 3;
        if (slot[bc] < 0) {
          slot[bc] = 0;
          cols.push_back(bc);
        }
      }
    }
    std::sort(cols.begin(), cols.end());
    for (std::size_t t = 0; t < cols.size(); ++t) {
      slot[cols[t]] = first_block + static_cast<index_t>(t);
      out.col_idx.push_back(cols[t]);
    }
    out.values.resize(out.values.size() + cols.size() * 9, 0.0);
    for (int i = 0; i < 3; ++i) {
      const index_t r = br * 3 + i;
      for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
        const index_t bc = a.col_idx[k] / 3;
        out.values[slot[bc] * 9 + i * 3 + a.col_idx[k] % 3] = a.values[k];
      }
    }
    for (index_t bc : cols) slot[bc] = -1;
    out.row_ptr[br + 1] = out.nnz_blocks();
  }
  return out;
}

template <int B>
std::vector<double> to_dense(const BlockSparseMatrix<B>& a) {
  const index_t nr = a.rows();
  const index_t nc = a.cols();
  std::vector<double> dense(static_cast<std::size_t>(nr * nc), 0.0);
  for (index_t br = 0; br < a.n_block_rows; ++br)
    for (index_t k = a.row_ptr[br]; k < a.row_ptr[br + 1]; ++k)
      for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j)
          dense[(br * B + i) * nc + a.col_idx[k] * B + j] = a.values[k * B * B + i * B + j];
  return dense;
}

void check_grid(const GridSpec& grid, int block_dim) {
  if (grid.nx < 1 || grid.ny < 1 || grid.nz < 1) throw InvalidArgument("grid dimensions must be >= 1");
  const index_t n = checked_mul(checked_mul(grid.nx, grid.ny), grid.nz);
  checked_mul(checked_mul(n, 7), index_t{block_dim} * block_dim);
}

index_t laplacian_block_count(const GridSpec& grid) {
  check_grid(grid, 1);
  return 7 * grid.size() - 2 * (grid.ny * grid.nz + grid.nx * grid.nz + grid.nx * grid.ny);
}

template <int B>
BlockSparseMatrix<B> generate_laplacian(const GridSpec& grid) {
  check_grid(grid, B);
  const index_t n = grid.size();
  const index_t nnzb = laplacian_block_count(grid);
  const index_t plane = grid.nx * grid.ny;

  BlockSparseMatrix<B> out;
  out.n_block_rows = out.n_block_cols = n;
  out.row_ptr.resize(static_cast<std::size_t>(n + 1));
  out.col_idx.resize(static_cast<std::size_t>(nnzb));
  out.values.assign(static_cast<std::size_t>(nnzb * B * B), 0.0);
  out.row_ptr[0] = 0;

  index_t pos = 0;
  auto put = [&](index_t col, double e) {
    out.col_idx[pos] = col;
    for (int d = 0; d < B; ++d) out.values[pos * B * B + d * B + d] = e;
    ++pos;
  };
  for (index_t k = 0; k < grid.nz; ++k)
    for (index_t j = 0; j < grid.ny; ++j)
      for (index_t i = 0; i < grid.nx; ++i) {
        const index_t g = grid.index(i, j, k);
        if (k > 0) put(g - plane, -1.0);
        if (j > 0) put(g - grid.nx, -1.0);
        if (i > 0) put(g - 1, -1.0);
        put(g, 6.0);
        if (i + 1 < grid.nx) put(g + 1, -1.0);
        if (j + 1 < grid.ny) put(g + grid.nx, -1.0);
        if (k + 1 < grid.nz) put(g + plane, -1.0);
        out.row_ptr[g + 1] = pos;
      }
  return out;
}

#define DDTRSV_INSTANTIATE(B)                                                                      \
  template struct BlockSparseMatrix<B>;                                                            \
  template void validate(const BlockSparseMatrix<B>&);                                             \
  template bool is_valid(const BlockSparseMatrix<B>&) noexcept;                                    \
  template BlockSparseMatrix<B> from_triplets<B>(index_t, index_t, std::span<const index_t>,       \
                                                 std::span<const index_t>, std::span<const double>); \
  template BlockSparseMatrix<B> identity_matrix<B>(index_t);                                       \
  template void spmv(const BlockSparseMatrix<B>&, std::span<const double>, std::span<double>,      \
                     WorkerPool*);                                                                 \
  template DenseVector spmv(const BlockSparseMatrix<B>&, std::span<const double>, WorkerPool*);    \
  template std::vector<double> to_dense(const BlockSparseMatrix<B>&);                              \
  template BlockSparseMatrix<B> generate_laplacian<B>(const GridSpec&);

DDTRSV_INSTANTIATE(1)
DDTRSV_INSTANTIATE(3)

#undef DDTRSV_INSTANTIATE

}  // namespace ddtrsv
