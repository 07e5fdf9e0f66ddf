#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ddtrsv/partition.hpp"
#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

class WorkerPool;

/// Nonzero accounting of a decomposition, in scalar entries.
struct DecompositionStats {
  index_t nnz_before = 0;
  index_t nnz_after = 0;
  index_t dropped = 0;
  double dropped_fraction = 0.0;

  static DecompositionStats from_counts(index_t before, index_t after);
};

/// Symmetric permutation P A P^T. Row j of the result is row
/// perm.new_to_old[j] of A with every column c renamed to
/// perm.old_to_new[c], then re-sorted by column. Values travel with their
/// columns, so blocks move intact.
template <int B>
BlockSparseMatrix<B> reorder(const BlockSparseMatrix<B>& a, const Permutation& perm,
                             WorkerPool* pool = nullptr);

inline CsrMatrix reorder_csr(const CsrMatrix& a, const Permutation& perm) { return reorder(a, perm); }
inline BsrMatrix reorder_bsr(const BsrMatrix& a, const Permutation& perm) { return reorder(a, perm); }

/// Keeps entry (r, c) iff owner[r] == owner[c]. `owner` assigns a subdomain
/// to every (block) row; it need not be contiguous.
template <int B>
std::pair<BlockSparseMatrix<B>, DecompositionStats> drop_inter_partition(
    const BlockSparseMatrix<B>& a, std::span<const index_t> owner);

/// Same, for a reordered matrix whose subdomains are contiguous ranges.
template <int B>
std::pair<BlockSparseMatrix<B>, DecompositionStats> drop_inter_partition(
    const BlockSparseMatrix<B>& a, const SubdomainLayout& layout);

/// Decomposition statistics of the block 7-point Laplacian on `grid` cut
/// into `tile`-sized subdomains, computed by enumerating the stencil without
/// materializing the matrix. Counts are scalar (block_dim^2 per block).
DecompositionStats laplacian_decomposition_stats(const GridSpec& grid, const GridSpec& tile,
                                                 int block_dim);

}  // namespace ddtrsv
