#include "ddtrsv/trisolve.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "ddtrsv/dense_block.hpp"
#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

namespace {

using FKind = FactorizationError::Kind;

inline bool is_dependency(Triangle t, index_t row, index_t col) {
  return t == Triangle::lower ? col < row : col > row;
}

template <int B>
void check_operands(const TriangularRef<B>& t, std::span<const double> b, std::span<double> x) {
  const auto& m = t.m();
  if (m.n_block_rows != m.n_block_cols) throw DimensionError("triangular factor must be square");
  if (static_cast<index_t>(b.size()) != m.rows() || static_cast<index_t>(x.size()) != m.rows())
    throw DimensionError("triangular solve operand length mismatch");
}

template <int B>
void check_layout(const TriangularRef<B>& t, const SubdomainLayout& layout, const TrisolveOptions& options) {
  if (layout.rows() != t.m().n_block_rows) throw DimensionError("layout does not cover the factor");
  if (layout.max_size() * B > options.max_subdomain_rows) {
    throw InvalidArgument("subdomain of " + std::to_string(layout.max_size() * B) +
                          " rows exceeds the scratch budget of " + std::to_string(options.max_subdomain_rows));
  }
}

// Applies the stored diagonal of row i to acc (no-op for unit factors).
template <int B>
inline void apply_diagonal(const TriangularRef<B>& t, index_t i, double* acc) {
  if (t.diagonal == DiagonalKind::unit) return;
  const auto& m = t.m();
  index_t d = t.triangle == Triangle::lower ? m.row_ptr[i + 1] - 1 : m.row_ptr[i];
  if (d < m.row_ptr[i] || d >= m.row_ptr[i + 1] || m.col_idx[d] != i) d = m.find(i, i);
  if (d < 0) throw FactorizationError(FKind::missing_diagonal, i, "row " + std::to_string(i) + " has no stored diagonal");
  const auto diag = m.block(d);
  if constexpr (B == 1) {
    if (diag[0] == 0.0) throw FactorizationError(FKind::zero_pivot, i, "zero diagonal in row " + std::to_string(i));
    acc[0] /= diag[0];
  } else {
    if (block::determinant<B>(diag) == 0.0)
      throw FactorizationError(FKind::singular_pivot_block, i, "singular diagonal block in row " + std::to_string(i));
    const auto inv = block::inverse<B>(diag);
    double tmp[B];
    block::gemv<B>(inv, acc, tmp);
    std::copy_n(tmp, B, acc);
  }
}

// acc holds b_i on entry and x_i on exit; xs(j) yields the solved row j.
template <int B, class RowAccess>
inline void substitute_row(const TriangularRef<B>& t, index_t i, double* acc, RowAccess&& xs) {
  const auto& m = t.m();
  for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
    const index_t j = m.col_idx[k];
    if (!is_dependency(t.triangle, i, j)) continue;
    block::gemv_subtract<B>(m.block(k), xs(j), acc);
  }
  apply_diagonal(t, i, acc);
}

template <int B>
void sweep_vc(const TriangularRef<B>& t, const LevelSchedule& sched, index_t s, SubdomainScratch& scratch,
              WorkerPool* pool, const TrisolveOptions& options) {
  auto xs = [&](index_t j) -> const double* { return scratch.row(j); };
  for (index_t l = 0; l < sched.level_count(s); ++l) {
    const auto rows = sched.level_rows(s, l);
    const auto width = static_cast<index_t>(rows.size());
    auto run = [&](index_t from, index_t to) {
      for (index_t r = from; r < to; ++r) {
        double* row = scratch.row(rows[r]);
        double acc[B];
        std::copy_n(row, B, acc);
        substitute_row(t, rows[r], acc, xs);
        std::copy_n(acc, B, row);
      }
    };
    const index_t per_task = std::max<index_t>(1, options.vc_rows_per_task);
    const index_t tasks = (width + per_task - 1) / per_task;
    if (pool != nullptr && tasks > 1) {
      pool->parallel_for(tasks, [&](index_t c) { run(c * per_task, std::min(width, (c + 1) * per_task)); });
    } else {
      run(0, width);
    }
  }
}

template <int B>
void sweep_ec(const TriangularRef<B>& t, const LevelSchedule& sched, index_t s, SubdomainScratch& scratch,
              WorkerPool* pool, const TrisolveOptions& options) {
  const auto& m = t.m();
  std::vector<index_t> prefix;
  for (index_t l = 0; l < sched.level_count(s); ++l) {
    const auto rows = sched.level_rows(s, l);
    prefix.assign(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      prefix[r + 1] = prefix[r] + (m.row_ptr[rows[r] + 1] - m.row_ptr[rows[r]]);
    const index_t edges = prefix.back();

    auto accumulate = [&](index_t from, index_t to) {
      auto pos = static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), from) - prefix.begin()) - 1;
      for (index_t e = from; e < to; ++e) {
        while (e >= prefix[pos + 1]) ++pos;
        const index_t i = rows[pos];
        const index_t k = m.row_ptr[i] + (e - prefix[pos]);
        const index_t j = m.col_idx[k];
        if (!is_dependency(t.triangle, i, j)) continue;
        const auto blk = m.block(k);
        const double* xj = scratch.row(j);
        double* si = scratch.row(i);
        for (int r = 0; r < B; ++r) {
          double p = 0.0;
          for (int c = 0; c < B; ++c) p += blk[r * B + c] * xj[c];
          std::atomic_ref<double>(si[r]).fetch_sub(p, std::memory_order_relaxed);
        }
      }
    };
    const index_t per_task = std::max<index_t>(1, options.ec_edges_per_task);
    const index_t tasks = (edges + per_task - 1) / per_task;
    if (pool != nullptr && tasks > 1) {
      pool->parallel_for(tasks, [&](index_t c) { accumulate(c * per_task, std::min(edges, (c + 1) * per_task)); });
    } else {
      accumulate(0, edges);
    }

    if (t.diagonal == DiagonalKind::stored) {
      for (index_t i : rows) apply_diagonal(t, i, scratch.row(i));
    }
  }
}

template <int B>
void sweep(const TriangularRef<B>& t, const LevelSchedule& sched, index_t s, SubdomainScratch& scratch,
           WorkerPool* pool, Traversal traversal, const TrisolveOptions& options) {
  if (traversal == Traversal::vertex_centric) {
    sweep_vc(t, sched, s, scratch, pool, options);
  } else {
    sweep_ec(t, sched, s, scratch, pool, options);
  }
}

template <int B>
void load(SubdomainScratch& scratch, std::span<const double> b) {
  std::copy_n(b.begin() + scratch.first_row() * B, scratch.block_rows() * B, scratch.values().begin());
}

template <int B>
void store(SubdomainScratch& scratch, std::span<double> x) {
  std::copy_n(scratch.values().begin(), scratch.block_rows() * B, x.begin() + scratch.first_row() * B);
}

template <int B>
void solve_level(const TriangularRef<B>& t, const LevelSchedule& schedule, std::span<const double> b,
                 std::span<double> x, WorkerPool* pool, Traversal traversal, const TrisolveOptions& options) {
  check_operands(t, b, x);
  check_layout(t, schedule.layout, options);
  const auto& layout = schedule.layout;
  for_each_index(pool, layout.count(), [&](index_t s) {
    SubdomainScratch scratch(layout.begin(s), layout.size(s), B, options.max_subdomain_rows);
    load<B>(scratch, b);
    sweep(t, schedule, s, scratch, pool, traversal, options);
    store<B>(scratch, x);
  });
}

void check_same_layout(const LevelSchedule& lower, const LevelSchedule& upper) {
  if (!std::ranges::equal(lower.layout.offsets(), upper.layout.offsets()))
    throw InvalidArgument("lower and upper schedules use different subdomain layouts");
}

}  // namespace

std::string_view to_string(SolveStrategy s) noexcept {
  switch (s) {
    case SolveStrategy::reference: return "reference";
    case SolveStrategy::syncfree: return "syncfree";
    case SolveStrategy::level_vc: return "level_vc";
    case SolveStrategy::level_ec: return "level_ec";
  }
  return "unknown";
}

SolveStrategy parse_solve_strategy(std::string_view name) {
  if (name == "reference") return SolveStrategy::reference;
  if (name == "syncfree") return SolveStrategy::syncfree;
  if (name == "level_vc" || name == "vc") return SolveStrategy::level_vc;
  if (name == "level_ec" || name == "ec") return SolveStrategy::level_ec;
  throw InvalidArgument("unknown solve strategy '" + std::string(name) + "'");
}

SubdomainScratch::SubdomainScratch(index_t first_row, index_t block_rows, int block_dim, index_t capacity)
    : first_(first_row), rows_(block_rows), dim_(block_dim) {
  if (block_rows * block_dim > capacity) {
    throw InvalidArgument("subdomain of " + std::to_string(block_rows * block_dim) +
                          " rows exceeds the scratch budget of " + std::to_string(capacity));
  }
  buf_.assign(static_cast<std::size_t>(block_rows * block_dim), 0.0);
}

void SubdomainScratch::throw_foreign(index_t row) const {
  throw ScratchOwnershipError("row " + std::to_string(row) + " is not owned by the scratch of rows [" +
                              std::to_string(first_) + ", " + std::to_string(first_ + rows_) + ")");
}

template <int B>
void solve_reference(const TriangularRef<B>& t, std::span<const double> b, std::span<double> x) {
  check_operands(t, b, x);
  if (x.data() != b.data()) std::copy(b.begin(), b.end(), x.begin());
  const index_t n = t.m().n_block_rows;
  auto xs = [&](index_t j) -> const double* { return x.data() + j * B; };
  auto row = [&](index_t i) {
    double acc[B];
    std::copy_n(x.data() + i * B, B, acc);
    substitute_row(t, i, acc, xs);
    std::copy_n(acc, B, x.data() + i * B);
  };
  if (t.triangle == Triangle::lower) {
    for (index_t i = 0; i < n; ++i) row(i);
  } else {
    for (index_t i = n; i-- > 0;) row(i);
  }
}

template <int B>
SyncFreePlan make_syncfree_plan(const TriangularRef<B>& t, const SubdomainLayout& layout) {
  const auto& m = t.m();
  const index_t n = m.n_block_rows;
  if (layout.rows() != n) throw DimensionError("layout does not cover the factor");
  const auto owner = layout.owners();

  SyncFreePlan plan;
  plan.layout = layout;
  plan.dependency_count.assign(static_cast<std::size_t>(n), 0);
  plan.dependents_ptr.assign(static_cast<std::size_t>(n + 1), 0);
  for (index_t i = 0; i < n; ++i)
    for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      const index_t j = m.col_idx[k];
      if (!is_dependency(t.triangle, i, j)) continue;
      if (owner[j] != owner[i]) {
        throw DecompositionError("row " + std::to_string(i) + " depends on row " + std::to_string(j) +
                                 " outside its subdomain");
      }
      ++plan.dependency_count[i];
      ++plan.dependents_ptr[j + 1];
    }
  for (index_t j = 0; j < n; ++j) plan.dependents_ptr[j + 1] += plan.dependents_ptr[j];
  plan.dependents.resize(static_cast<std::size_t>(plan.dependents_ptr.back()));
  plan.dependents_entry.resize(plan.dependents.size());
  std::vector<index_t> next(plan.dependents_ptr.begin(), plan.dependents_ptr.end() - 1);
  for (index_t i = 0; i < n; ++i)
    for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      const index_t j = m.col_idx[k];
      if (!is_dependency(t.triangle, i, j)) continue;
      plan.dependents[next[j]] = i;
      plan.dependents_entry[next[j]] = k;
      ++next[j];
    }
  return plan;
}

template <int B>
void solve_syncfree(const TriangularRef<B>& t, const SyncFreePlan& plan, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options) {
  check_operands(t, b, x);
  check_layout(t, plan.layout, options);
  const auto& m = t.m();
  const auto& layout = plan.layout;
  for_each_index(pool, layout.count(), [&](index_t s) {
    const index_t first = layout.begin(s);
    const index_t last = layout.end(s);
    SubdomainScratch sums(first, last - first, B, options.max_subdomain_rows);
    std::vector<index_t> remaining(plan.dependency_count.begin() + first, plan.dependency_count.begin() + last);
    std::vector<index_t> ready;
    ready.reserve(static_cast<std::size_t>(last - first));
    if (t.triangle == Triangle::lower) {
      for (index_t i = first; i < last; ++i)
        if (remaining[i - first] == 0) ready.push_back(i);
    } else {
      for (index_t i = last; i-- > first;)
        if (remaining[i - first] == 0) ready.push_back(i);
    }

    for (std::size_t head = 0; head < ready.size(); ++head) {
      const index_t i = ready[head];
      const double* partial = sums.row(i);
      double acc[B];
      for (int r = 0; r < B; ++r) acc[r] = b[i * B + r] - partial[r];
      apply_diagonal(t, i, acc);
      std::copy_n(acc, B, x.data() + i * B);

      for (index_t e = plan.dependents_ptr[i]; e < plan.dependents_ptr[i + 1]; ++e) {
        const index_t d = plan.dependents[e];
        const auto blk = m.block(plan.dependents_entry[e]);
        double* sd = sums.row(d);
        for (int r = 0; r < B; ++r) {
          double p = 0.0;
          for (int c = 0; c < B; ++c) p += blk[r * B + c] * acc[c];
          sd[r] += p;
        }
        if (--remaining[d - first] == 0) ready.push_back(d);
      }
    }
    if (static_cast<index_t>(ready.size()) != last - first)
      throw DecompositionError("dependency cycle in subdomain " + std::to_string(s));
  });
}

template <int B>
void solve_level_vc(const TriangularRef<B>& t, const LevelSchedule& schedule, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options) {
  solve_level(t, schedule, b, x, pool, Traversal::vertex_centric, options);
}

template <int B>
void solve_level_ec(const TriangularRef<B>& t, const LevelSchedule& schedule, std::span<const double> b,
                    std::span<double> x, WorkerPool* pool, const TrisolveOptions& options) {
  solve_level(t, schedule, b, x, pool, Traversal::edge_centric, options);
}

template <int B>
void triangular_multiply(const TriangularRef<B>& t, std::span<const double> x, std::span<double> y) {
  check_operands(t, x, y);
  const auto& m = t.m();
  for (index_t i = 0; i < m.n_block_rows; ++i) {
    double acc[B] = {};
    if (t.diagonal == DiagonalKind::unit) std::copy_n(x.data() + i * B, B, acc);
    for (index_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      const index_t j = m.col_idx[k];
      const bool diag_entry = j == i && t.diagonal == DiagonalKind::stored;
      if (!diag_entry && !is_dependency(t.triangle, i, j)) continue;
      const auto blk = m.block(k);
      for (int r = 0; r < B; ++r)
        for (int c = 0; c < B; ++c) acc[r] += blk[r * B + c] * x[j * B + c];
    }
    std::copy_n(acc, B, y.data() + i * B);
  }
}

template <int B>
void scale_by_inverse_diagonal(std::span<const double> inv_diag, std::span<double> x, WorkerPool* pool) {
  if (inv_diag.size() != x.size() * B) throw DimensionError("inverse diagonal length mismatch");
  const auto n = static_cast<index_t>(x.size()) / B;
  constexpr index_t chunk = 4096;
  for_each_index(pool, (n + chunk - 1) / chunk, [&](index_t c) {
    for (index_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
      double tmp[B];
      block::gemv<B>(block::ConstBlockSpan<B>(inv_diag.data() + i * B * B, B * B), x.data() + i * B, tmp);
      std::copy_n(tmp, B, x.data() + i * B);
    }
  });
}

template <int B>
void apply_ildu0_fused(const IlduFactors<B>& f, const LevelSchedule& lower, const LevelSchedule& upper,
                       std::span<const double> b, std::span<double> x, WorkerPool* pool, Traversal traversal,
                       const TrisolveOptions& options) {
  const auto l = lower_unit(f.lower);
  const auto u = upper_unit(f.upper_unit);
  check_operands(l, b, x);
  check_layout(l, lower.layout, options);
  check_same_layout(lower, upper);
  if (static_cast<index_t>(f.inv_diag.size()) != f.lower.n_block_rows * B * B)
    throw DimensionError("inverse diagonal length mismatch");

  const auto& layout = lower.layout;
  for_each_index(pool, layout.count(), [&](index_t s) {
    SubdomainScratch scratch(layout.begin(s), layout.size(s), B, options.max_subdomain_rows);
    load<B>(scratch, b);
    sweep(l, lower, s, scratch, pool, traversal, options);
    for (index_t i = layout.begin(s); i < layout.end(s); ++i) {
      double* row = scratch.row(i);
      double tmp[B];
      block::gemv<B>(block::ConstBlockSpan<B>(f.inv_diag.data() + i * B * B, B * B), row, tmp);
      std::copy_n(tmp, B, row);
    }
    sweep(u, upper, s, scratch, pool, traversal, options);
    store<B>(scratch, x);
  });
}

template <int B>
void apply_ildu0_unfused(const IlduFactors<B>& f, const LevelSchedule& lower, const LevelSchedule& upper,
                         std::span<const double> b, std::span<double> x, WorkerPool* pool, Traversal traversal,
                         const TrisolveOptions& options) {
  check_same_layout(lower, upper);
  solve_level(lower_unit(f.lower), lower, b, x, pool, traversal, options);
  scale_by_inverse_diagonal<B>(f.inv_diag, x, pool);
  solve_level(upper_unit(f.upper_unit), upper, std::span<const double>(x), x, pool, traversal, options);
}

template <int B>
LevelSchedule make_level_schedule(const TriangularRef<B>& t, const SubdomainLayout& layout, WorkerPool* pool,
                                  const TrisolveOptions& options) {
  check_layout(t, layout, options);
  return build_level_schedule(level_assign(t.m(), t.triangle, layout, pool), layout);
}

template <int B>
TriangularSolver<B>::TriangularSolver(const TriangularRef<B>& factor, const SubdomainLayout& layout,
                                      SolveStrategy strategy, WorkerPool* pool, const TrisolveOptions& options)
    : factor_(factor), strategy_(strategy), pool_(pool), options_(options) {
  switch (strategy_) {
    case SolveStrategy::reference:
      break;
    case SolveStrategy::syncfree:
      check_layout(factor_, layout, options_);
      plan_ = make_syncfree_plan(factor_, layout);
      break;
    case SolveStrategy::level_vc:
    case SolveStrategy::level_ec:
      schedule_ = make_level_schedule(factor_, layout, pool_, options_);
      break;
  }
}

template <int B>
void TriangularSolver<B>::solve(std::span<const double> b, std::span<double> x) const {
  switch (strategy_) {
    case SolveStrategy::reference:
      solve_reference(factor_, b, x);
      return;
    case SolveStrategy::syncfree:
      solve_syncfree(factor_, *plan_, b, x, pool_, options_);
      return;
    case SolveStrategy::level_vc:
      solve_level_vc(factor_, *schedule_, b, x, pool_, options_);
      return;
    case SolveStrategy::level_ec:
      solve_level_ec(factor_, *schedule_, b, x, pool_, options_);
      return;
  }
}

#define DDTRSV_INSTANTIATE(B)                                                                                    \
  template void solve_reference(const TriangularRef<B>&, std::span<const double>, std::span<double>);           \
  template SyncFreePlan make_syncfree_plan(const TriangularRef<B>&, const SubdomainLayout&);                    \
  template void solve_syncfree(const TriangularRef<B>&, const SyncFreePlan&, std::span<const double>,           \
                               std::span<double>, WorkerPool*, const TrisolveOptions&);                         \
  template void solve_level_vc(const TriangularRef<B>&, const LevelSchedule&, std::span<const double>,          \
                               std::span<double>, WorkerPool*, const TrisolveOptions&);                         \
  template void solve_level_ec(const TriangularRef<B>&, const LevelSchedule&, std::span<const double>,          \
                               std::span<double>, WorkerPool*, const TrisolveOptions&);                         \
  template void triangular_multiply(const TriangularRef<B>&, std::span<const double>, std::span<double>);       \
  template void scale_by_inverse_diagonal<B>(std::span<const double>, std::span<double>, WorkerPool*);          \
  template void apply_ildu0_fused(const IlduFactors<B>&, const LevelSchedule&, const LevelSchedule&,            \
                                  std::span<const double>, std::span<double>, WorkerPool*, Traversal,           \
                                  const TrisolveOptions&);                                                      \
  template void apply_ildu0_unfused(const IlduFactors<B>&, const LevelSchedule&, const LevelSchedule&,          \
                                    std::span<const double>, std::span<double>, WorkerPool*, Traversal,         \
                                    const TrisolveOptions&);                                                    \
  template LevelSchedule make_level_schedule(const TriangularRef<B>&, const SubdomainLayout&, WorkerPool*,      \
                                             const TrisolveOptions&);                                           \
  template class TriangularSolver<B>;

DDTRSV_INSTANTIATE(1)
DDTRSV_INSTANTIATE(3)

#undef DDTRSV_INSTANTIATE

}  // namespace ddtrsv
