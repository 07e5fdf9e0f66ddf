#pragma once

#include <span>
#include <vector>

#include "ddtrsv/common.hpp"

namespace ddtrsv {

class WorkerPool;

/// Compressed sparse row storage of B x B dense blocks.
///
/// B = 1 is plain CSR; B = 3 is the 3x3 block-sparse-row layout. Blocks are
/// stored row-major, `block_size` values per stored block. Within each block
/// row the block-column indices are strictly increasing.
template <int B>
struct BlockSparseMatrix {
  static_assert(B == 1 || B == 3, "only scalar CSR and 3x3 BSR are supported");

  static constexpr int block_dim = B;
  static constexpr int block_size = B * B;

  index_t n_block_rows = 0;
  index_t n_block_cols = 0;
  std::vector<index_t> row_ptr{0};
  std::vector<index_t> col_idx;
  std::vector<double> values;

  index_t rows() const noexcept { return B * n_block_rows; }
  index_t cols() const noexcept { return B * n_block_cols; }
  index_t nnz_blocks() const noexcept { return static_cast<index_t>(col_idx.size()); }
  /// Scalar nonzero count, explicit zeros included.
  index_t nnz() const noexcept { return block_size * nnz_blocks(); }

  std::span<const double, block_size> block(index_t k) const {
    return std::span<const double, block_size>(values.data() + k * block_size, block_size);
  }
  std::span<double, block_size> block(index_t k) {
    return std::span<double, block_size>(values.data() + k * block_size, block_size);
  }

  /// Position of block (row, col) in col_idx, or -1 when not stored.
  index_t find(index_t row, index_t col) const;

  bool operator==(const BlockSparseMatrix&) const = default;
};

using CsrMatrix = BlockSparseMatrix<1>;
using BsrMatrix = BlockSparseMatrix<3>;
using DenseVector = std::vector<double>;

/// Throws InvalidMatrix describing the first structural violation.
template <int B>
void validate(const BlockSparseMatrix<B>& a);

template <int B>
bool is_valid(const BlockSparseMatrix<B>& a) noexcept;

/// Builds a matrix from unsorted triplets (block coordinates); duplicate
/// coordinates are summed. `values` holds block_size entries per triplet.
template <int B>
BlockSparseMatrix<B> from_triplets(index_t n_block_rows, index_t n_block_cols,
                                   std::span<const index_t> rows, std::span<const index_t> cols,
                                   std::span<const double> values);

template <int B>
BlockSparseMatrix<B> identity_matrix(index_t n_block_rows);

/// y = A x. Rows are independent; each row sums its blocks in column order.
template <int B>
void spmv(const BlockSparseMatrix<B>& a, std::span<const double> x, std::span<double> y,
          WorkerPool* pool = nullptr);

template <int B>
DenseVector spmv(const BlockSparseMatrix<B>& a, std::span<const double> x,
                 WorkerPool* pool = nullptr);

/// Scalar expansion of a BSR matrix. Every stored block contributes all nine
/// entries, zeros included, so the pattern is preserved.
CsrMatrix bsr_to_csr(const BsrMatrix& a);

/// Groups a scalar matrix into 3x3 blocks; any block holding at least one
/// stored entry becomes a stored block. Dimensions must be multiples of 3.
BsrMatrix csr_to_bsr(const CsrMatrix& a);

/// Row-major dense copy, for tests and small diagnostics.
template <int B>
std::vector<double> to_dense(const BlockSparseMatrix<B>& a);

// ---------------------------------------------------------------------------
// Structured 3D grids

struct GridSpec {
  index_t nx = 1;
  index_t ny = 1;
  index_t nz = 1;

  index_t size() const noexcept { return nx * ny * nz; }
  index_t index(index_t i, index_t j, index_t k) const noexcept { return i + nx * (j + ny * k); }
  bool operator==(const GridSpec&) const = default;
};

/// Throws InvalidArgument on a non-positive dimension and DimensionError
/// when the stencil's scalar entry count would overflow index_t.
void check_grid(const GridSpec& grid, int block_dim);

/// Stored blocks of the 7-point stencil: 7 n - 2 (ny nz + nx nz + nx ny).
index_t laplacian_block_count(const GridSpec& grid);

/// 7-point Laplacian in natural ordering i + nx (j + ny k): 6 on the
/// diagonal, -1 for each neighbor. For B = 3 each scalar e becomes e I3.
template <int B>
BlockSparseMatrix<B> generate_laplacian(const GridSpec& grid);

inline CsrMatrix generate_laplacian_csr(const GridSpec& grid) { return generate_laplacian<1>(grid); }
inline BsrMatrix generate_laplacian_bsr(const GridSpec& grid) { return generate_laplacian<3>(grid); }

}  // namespace ddtrsv
