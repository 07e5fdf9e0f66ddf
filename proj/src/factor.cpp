#include "ddtrsv/factor.hpp"

#include <cmath>
#include <string>

#include "ddtrsv/dense_block.hpp"
#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

namespace {

using FKind = FactorizationError::Kind;

template <int B>
std::vector<index_t> diagonal_positions(const BlockSparseMatrix<B>& a) {
  if (a.n_block_rows != a.n_block_cols) throw DimensionError("ILU0 needs a square matrix");
  std::vector<index_t> diag(static_cast<std::size_t>(a.n_block_rows));
  for (index_t i = 0; i < a.n_block_rows; ++i) {
    diag[i] = a.find(i, i);
    if (diag[i] < 0) throw FactorizationError(FKind::missing_diagonal, i, "row " + std::to_string(i) + " has no diagonal entry");
  }
  return diag;
}

template <int B>
void check_pivot(block::ConstBlockSpan<B> d, index_t row, double floor) {
  if constexpr (B == 1) {
    if (!(std::abs(d[0]) >= floor))
      throw FactorizationError(FKind::zero_pivot, row, "zero pivot in row " + std::to_string(row));
  } else {
    if (!(std::abs(block::determinant<B>(d)) >= floor))
      throw FactorizationError(FKind::singular_pivot_block, row, "singular pivot block in row " + std::to_string(row));
  }
}

// Eliminates rows [first, last) in place. Columns of these rows must lie in
// [col_offset, col_offset + pos.size()).
template <int B>
void eliminate(const BlockSparseMatrix<B>& a, std::vector<double>& lu, const std::vector<index_t>& diag,
               std::vector<block::Block<B>>& pivot_inv, index_t first, index_t last, index_t col_offset,
               std::vector<index_t>& pos, double floor) {
  constexpr int bs = B * B;
  auto blk = [&](index_t k) { return block::BlockSpan<B>(lu.data() + k * bs, bs); };
  auto cblk = [&](index_t k) { return block::ConstBlockSpan<B>(lu.data() + k * bs, bs); };

  for (index_t i = first; i < last; ++i) {
    const index_t row_begin = a.row_ptr[i];
    const index_t row_end = a.row_ptr[i + 1];
    for (index_t k = row_begin; k < row_end; ++k) pos[a.col_idx[k] - col_offset] = k;

    for (index_t k = row_begin; k < row_end && a.col_idx[k] < i; ++k) {
      const index_t j = a.col_idx[k];
      if constexpr (B == 1) {
        lu[k] = lu[k] / lu[diag[j]];
      } else {
        const auto l = block::multiply<B>(cblk(k), pivot_inv[j]);
        std::copy(l.begin(), l.end(), blk(k).begin());
      }
      for (index_t m = diag[j] + 1; m < a.row_ptr[j + 1]; ++m) {
        const index_t p = pos[a.col_idx[m] - col_offset];
        if (p < 0) continue;
        if constexpr (B == 1) {
          lu[p] -= lu[k] * lu[m];
        } else {
          block::multiply_subtract<B>(cblk(k), cblk(m), blk(p));
        }
      }
    }

    check_pivot<B>(cblk(diag[i]), i, floor);
    if constexpr (B != 1) pivot_inv[i] = block::inverse<B>(cblk(diag[i]));
    for (index_t k = row_begin; k < row_end; ++k) pos[a.col_idx[k] - col_offset] = -1;
  }
}

template <int B>
IluFactors<B> split(const BlockSparseMatrix<B>& a, const std::vector<double>& lu) {
  constexpr int bs = B * B;
  IluFactors<B> f;
  for (auto* m : {&f.lower, &f.upper}) {
    m->n_block_rows = a.n_block_rows;
    m->n_block_cols = a.n_block_cols;
    m->row_ptr.assign(static_cast<std::size_t>(a.n_block_rows + 1), 0);
  }
  for (index_t i = 0; i < a.n_block_rows; ++i) {
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      auto& dst = a.col_idx[k] < i ? f.lower : f.upper;
      dst.col_idx.push_back(a.col_idx[k]);
      dst.values.insert(dst.values.end(), lu.begin() + k * bs, lu.begin() + (k + 1) * bs);
    }
    f.lower.row_ptr[i + 1] = f.lower.nnz_blocks();
    f.upper.row_ptr[i + 1] = f.upper.nnz_blocks();
  }
  return f;
}

}  // namespace

template <int B>
IluFactors<B> ilu0(const BlockSparseMatrix<B>& a, const FactorOptions& options) {
  const auto diag = diagonal_positions(a);
  std::vector<double> lu = a.values;
  std::vector<block::Block<B>> pivot_inv(B == 1 ? 0 : static_cast<std::size_t>(a.n_block_rows));
  std::vector<index_t> pos(static_cast<std::size_t>(a.n_block_cols), -1);
  eliminate(a, lu, diag, pivot_inv, 0, a.n_block_rows, 0, pos, options.pivot_floor);
  return split(a, lu);
}

template <int B>
IluFactors<B> ilu0(const BlockSparseMatrix<B>& a, const SubdomainLayout& layout, WorkerPool* pool,
                   const FactorOptions& options) {
  if (layout.rows() != a.n_block_rows) throw DimensionError("layout does not cover the matrix");
  const auto diag = diagonal_positions(a);
  for (index_t s = 0; s < layout.count(); ++s)
    for (index_t k = a.row_ptr[layout.begin(s)]; k < a.row_ptr[layout.end(s)]; ++k)
      if (a.col_idx[k] < layout.begin(s) || a.col_idx[k] >= layout.end(s))
        throw DecompositionError("matrix entry couples subdomain " + std::to_string(s) + " to another subdomain");

  std::vector<double> lu = a.values;
  std::vector<block::Block<B>> pivot_inv(B == 1 ? 0 : static_cast<std::size_t>(a.n_block_rows));
  for_each_index(pool, layout.count(), [&](index_t s) {
    std::vector<index_t> pos(static_cast<std::size_t>(layout.size(s)), -1);
    eliminate(a, lu, diag, pivot_inv, layout.begin(s), layout.end(s), layout.begin(s), pos, options.pivot_floor);
  });
  return split(a, lu);
}

template <int B>
IlduFactors<B> ildu0(const IluFactors<B>& factors, const FactorOptions& options) {
  constexpr int bs = B * B;
  const auto& u = factors.upper;
  IlduFactors<B> out;
  out.lower = factors.lower;
  out.upper_unit.n_block_rows = u.n_block_rows;
  out.upper_unit.n_block_cols = u.n_block_cols;
  out.upper_unit.row_ptr.assign(static_cast<std::size_t>(u.n_block_rows + 1), 0);
  out.inv_diag.resize(static_cast<std::size_t>(u.n_block_rows * bs));

  for (index_t i = 0; i < u.n_block_rows; ++i) {
    const index_t first = u.row_ptr[i];
    if (first == u.row_ptr[i + 1] || u.col_idx[first] != i)
      throw FactorizationError(FKind::missing_diagonal, i, "upper factor row " + std::to_string(i) + " lacks its diagonal");
    check_pivot<B>(u.block(first), i, options.pivot_floor);
    const auto inv = block::inverse<B>(u.block(first));
    std::copy(inv.begin(), inv.end(), out.inv_diag.begin() + i * bs);
    for (index_t k = first + 1; k < u.row_ptr[i + 1]; ++k) {
      out.upper_unit.col_idx.push_back(u.col_idx[k]);
      if constexpr (B == 1) {
        out.upper_unit.values.push_back(u.values[k] * inv[0]);
      } else {
        const auto scaled = block::multiply<B>(inv, u.block(k));
        out.upper_unit.values.insert(out.upper_unit.values.end(), scaled.begin(), scaled.end());
      }
    }
    out.upper_unit.row_ptr[i + 1] = out.upper_unit.nnz_blocks();
  }
  return out;
}

template IluFactors<1> ilu0(const BlockSparseMatrix<1>&, const FactorOptions&);
template IluFactors<3> ilu0(const BlockSparseMatrix<3>&, const FactorOptions&);
template IluFactors<1> ilu0(const BlockSparseMatrix<1>&, const SubdomainLayout&, WorkerPool*, const FactorOptions&);
template IluFactors<3> ilu0(const BlockSparseMatrix<3>&, const SubdomainLayout&, WorkerPool*, const FactorOptions&);
template IlduFactors<1> ildu0(const IluFactors<1>&, const FactorOptions&);
template IlduFactors<3> ildu0(const IluFactors<3>&, const FactorOptions&);

}  // namespace ddtrsv
