#pragma once

#include <vector>

#include "ddtrsv/partition.hpp"
#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

class WorkerPool;

struct FactorOptions {
  /// Pivots with |u_ii| (scalar) or |det U_ii| (block) below this fail.
  double pivot_floor = 1e-300;
};

/// Zero fill-in LU factors. `lower` holds the strictly lower part of a
/// unit-diagonal L (the unit diagonal is implicit); `upper` holds U with its
/// diagonal stored first in every row.
template <int B>
struct IluFactors {
  BlockSparseMatrix<B> lower;
  BlockSparseMatrix<B> upper;
};

/// L D U_unit form of an ILU0 factorization. `upper_unit` holds only the
/// strictly upper entries, already scaled by the row's inverse diagonal;
/// `inv_diag` stores (U_ii)^-1 as one B x B block per row.
template <int B>
struct IlduFactors {
  BlockSparseMatrix<B> lower;
  BlockSparseMatrix<B> upper_unit;
  std::vector<double> inv_diag;
};

/// Pattern-restricted IKJ elimination: l_ij = u_ij (u_jj)^-1 and
/// u_ik -= l_ij u_jk only where (i, k) is stored in A. On a full pattern this
/// is unpivoted LU.
///
/// Throws FactorizationError (missing_diagonal, zero_pivot, or
/// singular_pivot_block) naming the offending row.
template <int B>
IluFactors<B> ilu0(const BlockSparseMatrix<B>& a, const FactorOptions& options = {});

/// Same factorization with subdomains of a decomposed matrix eliminated as
/// independent tasks. Throws DecompositionError if an entry couples two
/// subdomains. The result is bitwise identical to the sequential call.
template <int B>
IluFactors<B> ilu0(const BlockSparseMatrix<B>& a, const SubdomainLayout& layout, WorkerPool* pool,
                   const FactorOptions& options = {});

inline IluFactors<1> ilu0_csr(const CsrMatrix& a, const FactorOptions& o = {}) { return ilu0(a, o); }
inline IluFactors<3> ilu0_bsr(const BsrMatrix& a, const FactorOptions& o = {}) { return ilu0(a, o); }

/// inv_diag[i] = (U_ii)^-1 and U_unit row i = inv_diag[i] * U_ij (j > i).
template <int B>
IlduFactors<B> ildu0(const IluFactors<B>& factors, const FactorOptions& options = {});

}  // namespace ddtrsv
