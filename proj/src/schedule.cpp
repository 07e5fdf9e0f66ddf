#include "ddtrsv/schedule.hpp"

#include <algorithm>
#include <string>

#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

index_t LevelMap::max_level() const noexcept {
  index_t m = -1;
  for (index_t l : level) m = std::max(m, l);
  return m;
}

template <int B>
LevelMap level_assign(const BlockSparseMatrix<B>& factor, Triangle triangle, const SubdomainLayout& layout,
                      WorkerPool* pool) {
  const index_t n = factor.n_block_rows;
  if (layout.rows() != n) throw DimensionError("layout does not cover the factor");

  const index_t unassigned = n + 1;
  LevelMap out;
  out.level.assign(static_cast<std::size_t>(n), unassigned);

  for_each_index(pool, layout.count(), [&](index_t s) {
    const index_t first = layout.begin(s);
    const index_t last = layout.end(s);
    auto assign_row = [&](index_t i) {
      index_t lvl = 0;
      for (index_t k = factor.row_ptr[i]; k < factor.row_ptr[i + 1]; ++k) {
        const index_t j = factor.col_idx[k];
        const bool dep = triangle == Triangle::lower ? j < i : j > i;
        if (!dep) continue;
        if (j < first || j >= last) {
          throw DecompositionError("row " + std::to_string(i) + " depends on row " + std::to_string(j) +
                                   " outside its subdomain");
        }
        lvl = std::max(lvl, out.level[j] + 1);
      }
      out.level[i] = lvl;
    };
    if (triangle == Triangle::lower) {
      for (index_t i = first; i < last; ++i) assign_row(i);
    } else {
      for (index_t i = last; i-- > first;) assign_row(i);
    }
  });
  return out;
}

template LevelMap level_assign(const BlockSparseMatrix<1>&, Triangle, const SubdomainLayout&, WorkerPool*);
template LevelMap level_assign(const BlockSparseMatrix<3>&, Triangle, const SubdomainLayout&, WorkerPool*);

LevelSchedule build_level_schedule(const LevelMap& levels, const SubdomainLayout& layout) {
  if (static_cast<index_t>(levels.level.size()) != layout.rows())
    throw DimensionError("level map does not cover the layout");

  LevelSchedule out;
  out.layout = layout;
  out.rows.reserve(levels.level.size());
  std::vector<index_t> counts;
  for (index_t s = 0; s < layout.count(); ++s) {
    index_t depth = 0;
    for (index_t i = layout.begin(s); i < layout.end(s); ++i) {
      if (levels.level[i] < 0 || levels.level[i] > layout.rows())
        throw InvalidArgument("row " + std::to_string(i) + " has no level");
      depth = std::max(depth, levels.level[i] + 1);
    }
    // Counting sort by level keeps rows ascending inside each level.
    counts.assign(static_cast<std::size_t>(depth + 1), 0);
    for (index_t i = layout.begin(s); i < layout.end(s); ++i) ++counts[levels.level[i] + 1];
    const auto base = static_cast<index_t>(out.rows.size());
    for (index_t l = 0; l < depth; ++l) {
      counts[l + 1] += counts[l];
      out.level_ptr.push_back(base + counts[l + 1]);
    }
    out.rows.resize(out.rows.size() + static_cast<std::size_t>(layout.size(s)));
    for (index_t i = layout.begin(s); i < layout.end(s); ++i) out.rows[base + counts[levels.level[i]]++] = i;
    out.subdomain_level_ptr.push_back(static_cast<index_t>(out.level_ptr.size()) - 1);
  }
  return out;
}

ScheduleSummary summarize(const LevelSchedule& schedule) {
  ScheduleSummary s;
  const index_t n_sub = schedule.layout.count();
  for (index_t d = 0; d < n_sub; ++d) s.max_levels = std::max(s.max_levels, schedule.level_count(d));
  const index_t total = schedule.total_levels();
  s.mean_level_width = total > 0 ? static_cast<double>(schedule.rows.size()) / static_cast<double>(total) : 0.0;
  return s;
}

}  // namespace ddtrsv
