#include "ddtrsv/reorder.hpp"

#include <algorithm>
#include <numeric>

#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

namespace {
constexpr index_t kRowChunk = 4096;
}

DecompositionStats DecompositionStats::from_counts(index_t before, index_t after) {
  DecompositionStats s;
  s.nnz_before = before;
  s.nnz_after = after;
  s.dropped = before - after;
  s.dropped_fraction = before > 0 ? static_cast<double>(s.dropped) / static_cast<double>(before) : 0.0;
  return s;
}

template <int B>
BlockSparseMatrix<B> reorder(const BlockSparseMatrix<B>& a, const Permutation& perm, WorkerPool* pool) {
  constexpr int bs = B * B;
  const index_t n = a.n_block_rows;
  if (a.n_block_rows != a.n_block_cols) throw DimensionError("symmetric reordering needs a square matrix");
  if (perm.size() != n) throw DimensionError("permutation length does not match the matrix");

  BlockSparseMatrix<B> out;
  out.n_block_rows = out.n_block_cols = n;
  out.row_ptr.assign(static_cast<std::size_t>(n + 1), 0);
  for (index_t i = 0; i < n; ++i) {
    const index_t k = perm.new_to_old[i];
    out.row_ptr[i + 1] = a.row_ptr[k + 1] - a.row_ptr[k];
  }
  std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
  out.col_idx.resize(a.col_idx.size());
  out.values.resize(a.values.size());

  const index_t chunks = (n + kRowChunk - 1) / kRowChunk;
  for_each_index(pool, chunks, [&](index_t chunk) {
    std::vector<std::pair<index_t, index_t>> row;  // (new column, source position)
    const index_t last = std::min(n, (chunk + 1) * kRowChunk);
    for (index_t i = chunk * kRowChunk; i < last; ++i) {
      const index_t m = perm.new_to_old[i];
      row.clear();
      for (index_t j = a.row_ptr[m]; j < a.row_ptr[m + 1]; ++j) row.emplace_back(perm.old_to_new[a.col_idx[j]], j);
      std::sort(row.begin(), row.end());
      index_t dst = out.row_ptr[i];
      for (const auto& [col, src] : row) {
        out.col_idx[dst] = col;
        std::copy_n(a.values.begin() + src * bs, bs, out.values.begin() + dst * bs);
        ++dst;
      }
    }
  });
  return out;
}

template <int B>
std::pair<BlockSparseMatrix<B>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<B>& a,
                                                                         std::span<const index_t> owner) {
  constexpr int bs = B * B;
  if (static_cast<index_t>(owner.size()) != a.n_block_rows || a.n_block_rows != a.n_block_cols)
    throw DimensionError("owner array must cover every row of a square matrix");

  BlockSparseMatrix<B> out;
  out.n_block_rows = a.n_block_rows;
  out.n_block_cols = a.n_block_cols;
  out.row_ptr.assign(static_cast<std::size_t>(a.n_block_rows + 1), 0);
  out.col_idx.reserve(a.col_idx.size());
  out.values.reserve(a.values.size());
  for (index_t r = 0; r < a.n_block_rows; ++r) {
    for (index_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (owner[a.col_idx[k]] != owner[r]) continue;
      out.col_idx.push_back(a.col_idx[k]);
      out.values.insert(out.values.end(), a.values.begin() + k * bs, a.values.begin() + (k + 1) * bs);
    }
    out.row_ptr[r + 1] = out.nnz_blocks();
  }
  const auto stats = DecompositionStats::from_counts(a.nnz(), out.nnz());
  return {std::move(out), stats};
}

template <int B>
std::pair<BlockSparseMatrix<B>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<B>& a,
                                                                         const SubdomainLayout& layout) {
  if (layout.rows() != a.n_block_rows) throw DimensionError("layout does not cover the matrix");
  const auto owner = layout.owners();
  return drop_inter_partition(a, std::span<const index_t>(owner));
}

DecompositionStats laplacian_decomposition_stats(const GridSpec& grid, const GridSpec& tile, int block_dim) {
  check_grid(grid, block_dim);
  if (tile.nx < 1 || tile.ny < 1 || tile.nz < 1) throw InvalidArgument("tile dimensions must be >= 1");
  if (grid.nx % tile.nx != 0 || grid.ny % tile.ny != 0 || grid.nz % tile.nz != 0)
    throw InvalidArgument("grid dimensions must be divisible by the tile dimensions");

  const index_t bx = grid.nx / tile.nx;
  const index_t by = grid.ny / tile.ny;
  auto label = [&](index_t i, index_t j, index_t k) {
    return i / tile.nx + bx * (j / tile.ny + by * (k / tile.nz));
  };

  index_t blocks = 0;
  index_t kept = 0;
  for (index_t k = 0; k < grid.nz; ++k)
    for (index_t j = 0; j < grid.ny; ++j)
      for (index_t i = 0; i < grid.nx; ++i) {
        const index_t own = label(i, j, k);
        auto visit = [&](index_t ii, index_t jj, index_t kk) {
          ++blocks;
          if (label(ii, jj, kk) == own) ++kept;
        };
        visit(i, j, k);
        if (i > 0) visit(i - 1, j, k);
        if (i + 1 < grid.nx) visit(i + 1, j, k);
        if (j > 0) visit(i, j - 1, k);
        if (j + 1 < grid.ny) visit(i, j + 1, k);
        if (k > 0) visit(i, j, k - 1);
        if (k + 1 < grid.nz) visit(i, j, k + 1);
      }
  const index_t per_block = index_t{block_dim} * block_dim;
  return DecompositionStats::from_counts(blocks * per_block, kept * per_block);
}

template BlockSparseMatrix<1> reorder(const BlockSparseMatrix<1>&, const Permutation&, WorkerPool*);
template BlockSparseMatrix<3> reorder(const BlockSparseMatrix<3>&, const Permutation&, WorkerPool*);
template std::pair<BlockSparseMatrix<1>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<1>&,
                                                                                  std::span<const index_t>);
template std::pair<BlockSparseMatrix<3>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<3>&,
                                                                                  std::span<const index_t>);
template std::pair<BlockSparseMatrix<1>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<1>&,
                                                                                  const SubdomainLayout&);
template std::pair<BlockSparseMatrix<3>, DecompositionStats> drop_inter_partition(const BlockSparseMatrix<3>&,
                                                                                  const SubdomainLayout&);

}  // namespace ddtrsv
