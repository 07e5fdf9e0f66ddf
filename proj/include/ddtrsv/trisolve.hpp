#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ddtrsv/factor.hpp"
#include "ddtrsv/partition.hpp"
#include "ddtrsv/schedule.hpp"
#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

class WorkerPool;

enum class DiagonalKind {
  unit,    // diagonal not stored, taken as identity
  stored,  // diagonal stored in the row; the solve divides by it
};

/// Non-owning view of a triangular factor. Entries on the wrong side of the
/// diagonal are ignored, so a combined matrix may be viewed either way.
template <int B>
struct TriangularRef {
  const BlockSparseMatrix<B>* matrix = nullptr;
  Triangle triangle = Triangle::lower;
  DiagonalKind diagonal = DiagonalKind::unit;

  const BlockSparseMatrix<B>& m() const { return *matrix; }
};

template <int B>
TriangularRef<B> lower_unit(const BlockSparseMatrix<B>& m) { return {&m, Triangle::lower, DiagonalKind::unit}; }
template <int B>
TriangularRef<B> lower_stored(const BlockSparseMatrix<B>& m) { return {&m, Triangle::lower, DiagonalKind::stored}; }
template <int B>
TriangularRef<B> upper_unit(const BlockSparseMatrix<B>& m) { return {&m, Triangle::upper, DiagonalKind::unit}; }
template <int B>
TriangularRef<B> upper_stored(const BlockSparseMatrix<B>& m) { return {&m, Triangle::upper, DiagonalKind::stored}; }

enum class SolveStrategy { reference, syncfree, level_vc, level_ec };

std::string_view to_string(SolveStrategy s) noexcept;
/// Accepts "reference", "syncfree", "level_vc" / "vc", "level_ec" / "ec".
SolveStrategy parse_solve_strategy(std::string_view name);

struct TrisolveOptions {
  /// Scratch budget per subdomain, in scalar rows.
  index_t max_subdomain_rows = 8192;
  /// Vertex-centric: rows of one level handed to a single nested task.
  index_t vc_rows_per_task = 64;
  /// Edge-centric: nonzeros of one level handed to a single nested task.
  index_t ec_edges_per_task = 256;
};

class ScratchOwnershipError : public Error {
 public:
  using Error::Error;
};

/// Dense per-subdomain working buffer, the CPU stand-in for GPU shared
/// memory. Only rows of the owning subdomain are addressable.
class SubdomainScratch {
 public:
  SubdomainScratch(index_t first_row, index_t block_rows, int block_dim, index_t capacity);

  /// Pointer to the block_dim values of a row; throws ScratchOwnershipError
  /// for rows of other subdomains.
  double* row(index_t global_row) {
    if (global_row < first_ || global_row >= first_ + rows_) throw_foreign(global_row);
    return buf_.data() + (global_row - first_) * dim_;
  }

  index_t first_row() const noexcept { return first_; }
  index_t block_rows() const noexcept { return rows_; }
  std::span<double> values() noexcept { return buf_; }

 private:
  [[noreturn]] void throw_foreign(index_t row) const;

  std::vector<double> buf_;
  index_t first_;
  index_t rows_;
  int dim_;
};

/// Sequential substitution in row order (ascending for lower, descending for
/// upper). Each row computes x_i = b_i - sum_j T_ij x_j over columns in
/// ascending order and then applies the diagonal. `x` may alias `b`.
/// Throws FactorizationError on a missing or singular stored diagonal.
template <int B>
void solve_reference(const TriangularRef<B>& t, std::span<const double> b, std::span<double> x);

/// Dependency-driven solve. Each subdomain is one task; rows run as soon as
/// their last dependency completes, and completed rows push their products
/// into the partial sums of their dependents.
struct SyncFreePlan {
  SubdomainLayout layout;
  std::vector<index_t> dependency_count;
  std::vector<index_t> dependents_ptr;
  std::vector<index_t> dependents;        // row waiting on this row
  std::vector<index_t> dependents_entry;  // block position of that coupling in the factor
};

/// Throws DecompositionError if a dependency leaves its subdomain.
template <int B>
SyncFreePlan make_syncfree_plan(const TriangularRef<B>& t, const SubdomainLayout& layout);

template <int B>
void solve_syncfree(const TriangularRef<B>& t, const SyncFreePlan& plan, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options = {});

/// Level-scheduled solve, one task per subdomain, rows of a level in
/// parallel, each row's nonzeros in column order. Bitwise equal to
/// solve_reference for any worker count.
template <int B>
void solve_level_vc(const TriangularRef<B>& t, const LevelSchedule& schedule, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options = {});

/// Level-scheduled solve parallel over the nonzeros of each level, with
/// atomic accumulation into the scratch rows; the diagonal is applied once a
/// level's accumulation has finished.
template <int B>
void solve_level_ec(const TriangularRef<B>& t, const LevelSchedule& schedule, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options = {});

/// y = T x, including the (implicit or stored) diagonal.
template <int B>
void triangular_multiply(const TriangularRef<B>& t, std::span<const double> x, std::span<double> y);

/// x_i <- inv_diag_i x_i for every block row.
template <int B>
void scale_by_inverse_diagonal(std::span<const double> inv_diag, std::span<double> x, WorkerPool* pool = nullptr);

enum class Traversal { vertex_centric, edge_centric };

/// Preconditioner apply x = U_unit^-1 D^-1 L^-1 b with every subdomain kept
/// in one scratch buffer for all three steps and written back once.
template <int B>
void apply_ildu0_fused(const IlduFactors<B>& f, const LevelSchedule& lower, const LevelSchedule& upper,
                       std::span<const double> b, std::span<double> x, WorkerPool* pool,
                       Traversal traversal = Traversal::vertex_centric, const TrisolveOptions& options = {});

/// Same operator as three separate passes over x: lower solve, diagonal
/// scaling, upper solve.
template <int B>
void apply_ildu0_unfused(const IlduFactors<B>& f, const LevelSchedule& lower, const LevelSchedule& upper,
                         std::span<const double> b, std::span<double> x, WorkerPool* pool,
                         Traversal traversal = Traversal::vertex_centric, const TrisolveOptions& options = {});

/// Strategy-dispatching solver owning whatever analysis its strategy needs.
/// The factor is referenced, not copied, and must outlive the solver.
template <int B>
class TriangularSolver {
 public:
  TriangularSolver(const TriangularRef<B>& factor, const SubdomainLayout& layout, SolveStrategy strategy,
                   WorkerPool* pool, const TrisolveOptions& options = {});

  void solve(std::span<const double> b, std::span<double> x) const;

  SolveStrategy strategy() const noexcept { return strategy_; }
  const LevelSchedule* schedule() const noexcept { return schedule_ ? &*schedule_ : nullptr; }

 private:
  TriangularRef<B> factor_;
  SolveStrategy strategy_;
  WorkerPool* pool_;
  TrisolveOptions options_;
  std::optional<LevelSchedule> schedule_;
  std::optional<SyncFreePlan> plan_;
};

/// Level schedule of a factor, validated against the scratch budget.
template <int B>
LevelSchedule make_level_schedule(const TriangularRef<B>& t, const SubdomainLayout& layout, WorkerPool* pool,
                                  const TrisolveOptions& options = {});

}  // namespace ddtrsv
