#pragma once

#include <span>
#include <vector>

#include "ddtrsv/partition.hpp"
#include "ddtrsv/sparse_matrix.hpp"

namespace ddtrsv {

class WorkerPool;

enum class Triangle { lower, upper };

/// Level of every (block) row in the dependency DAG of a triangular factor.
/// Level 0 rows have no off-diagonal entries in their triangle; any other row
/// sits one level above its deepest dependency.
struct LevelMap {
  std::vector<index_t> level;

  index_t max_level() const noexcept;
};

/// Longest-path levels computed per subdomain in one topological sweep
/// (ascending rows for lower, descending for upper). Only entries strictly
/// inside `triangle` are treated as dependencies, so a full decomposed matrix
/// can be passed in place of its factor.
///
/// Throws DecompositionError if a dependency crosses a subdomain boundary.
template <int B>
LevelMap level_assign(const BlockSparseMatrix<B>& factor, Triangle triangle, const SubdomainLayout& layout,
                      WorkerPool* pool = nullptr);

template <int B>
LevelMap level_assign_lower(const BlockSparseMatrix<B>& lower, const SubdomainLayout& layout,
                            WorkerPool* pool = nullptr) {
  return level_assign(lower, Triangle::lower, layout, pool);
}

template <int B>
LevelMap level_assign_upper(const BlockSparseMatrix<B>& upper, const SubdomainLayout& layout,
                            WorkerPool* pool = nullptr) {
  return level_assign(upper, Triangle::upper, layout, pool);
}

/// Rows bucketed by (subdomain, level), ascending within each level.
///
/// Levels of subdomain s are the global level ids in
/// [subdomain_level_ptr[s], subdomain_level_ptr[s+1]); level id l holds
/// rows[level_ptr[l] .. level_ptr[l+1]).
struct LevelSchedule {
  SubdomainLayout layout;
  std::vector<index_t> subdomain_level_ptr{0};
  std::vector<index_t> level_ptr{0};
  std::vector<index_t> rows;

  index_t level_count(index_t s) const noexcept { return subdomain_level_ptr[s + 1] - subdomain_level_ptr[s]; }
  /// Rows of the l-th level (0-based, within subdomain s).
  std::span<const index_t> level_rows(index_t s, index_t l) const noexcept {
    const index_t id = subdomain_level_ptr[s] + l;
    return std::span<const index_t>(rows).subspan(level_ptr[id], level_ptr[id + 1] - level_ptr[id]);
  }
  index_t total_levels() const noexcept { return static_cast<index_t>(level_ptr.size()) - 1; }
};

LevelSchedule build_level_schedule(const LevelMap& levels, const SubdomainLayout& layout);

struct ScheduleSummary {
  index_t max_levels = 0;          // deepest subdomain DAG
  double mean_level_width = 0.0;   // rows per level, over all subdomain levels
};

ScheduleSummary summarize(const LevelSchedule& schedule);

}  // namespace ddtrsv
