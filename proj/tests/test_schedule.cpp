#include <gtest/gtest.h>

#include <algorithm>

#include "ddtrsv/schedule.hpp"
#include "ddtrsv/worker_pool.hpp"
#include "oracles.hpp"

namespace ddtrsv {
namespace {

using testing::Rng;

TEST(LevelAssign, ChainHasOneRowPerLevel) {
  const auto a = generate_laplacian_csr({5, 1, 1});
  const auto lower = level_assign_lower(a, SubdomainLayout::single(5));
  EXPECT_EQ(lower.level, (std::vector<index_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(lower.max_level(), 4);
  const auto upper = level_assign_upper(a, SubdomainLayout::single(5));
  EXPECT_EQ(upper.level, (std::vector<index_t>{4, 3, 2, 1, 0}));
}

TEST(LevelAssign, DiagonalOnlyRowsAreLevelZero) {
  const auto lv = level_assign_lower(identity_matrix<3>(4), SubdomainLayout::uniform(4, 2));
  EXPECT_EQ(lv.level, (std::vector<index_t>(4, 0)));
}

TEST(LevelAssign, GridLevelsAreAntiDiagonals) {
  const GridSpec g{3, 3, 1};
  const auto lv = level_assign_lower(generate_laplacian_csr(g), SubdomainLayout::single(9));
  for (index_t j = 0; j < 3; ++j)
    for (index_t i = 0; i < 3; ++i) EXPECT_EQ(lv.level[g.index(i, j, 0)], i + j);
}

TEST(LevelAssign, CrossSubdomainDependencyThrows) {
  const auto a = generate_laplacian_csr({4, 1, 1});
  EXPECT_THROW(level_assign_lower(a, SubdomainLayout::uniform(4, 2)), DecompositionError);
  EXPECT_THROW(level_assign_upper(a, SubdomainLayout::uniform(4, 2)), DecompositionError);
}

TEST(LevelAssign, RejectsLayoutSizeMismatch) {
  EXPECT_THROW(level_assign_lower(identity_matrix<1>(4), SubdomainLayout::single(3)), DimensionError);
}

TEST(LevelAssign, MatchesFixpointAndOrdersDependencies) {
  Rng rng(17);
  WorkerPool pool(3);
  for (int trial = 0; trial < 40; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 600);
    const auto layout = testing::random_layout(rng, n, 128);
    const Triangle tri = trial % 2 == 0 ? Triangle::lower : Triangle::upper;
    const auto m = testing::random_triangular<1>(rng, layout, tri, DiagonalKind::stored);
    const auto lv = level_assign(m, tri, layout, &pool);
    const auto deps = testing::dependencies(m, tri);
    EXPECT_EQ(lv.level, testing::fixpoint_levels(deps));
    for (index_t i = 0; i < n; ++i) {
      index_t deepest = -1;
      for (index_t j : deps[i]) {
        EXPECT_LT(lv.level[j], lv.level[i]);
        deepest = std::max(deepest, lv.level[j]);
      }
      EXPECT_EQ(lv.level[i], deepest + 1);
    }
  }
}

TEST(LevelSchedule, BucketsRowsAscendingPerLevel) {
  const GridSpec g{3, 3, 2};
  const auto layout = SubdomainLayout::uniform(18, 9);
  // two decoupled 3x3 planes
  const auto a = generate_laplacian_csr({3, 3, 1});
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t s = 0; s < 2; ++s)
    for (index_t i = 0; i < 9; ++i)
      for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
        r.push_back(9 * s + i);
        c.push_back(9 * s + a.col_idx[k]);
        v.push_back(a.values[k]);
      }
  const auto m = from_triplets<1>(g.size(), g.size(), r, c, v);
  const auto sched = build_level_schedule(level_assign_lower(m, layout), layout);
  EXPECT_EQ(sched.level_count(0), 5);
  EXPECT_EQ(sched.level_count(1), 5);
  EXPECT_EQ(sched.total_levels(), 10);
  const auto mid = sched.level_rows(1, 2);
  EXPECT_EQ(std::vector<index_t>(mid.begin(), mid.end()), (std::vector<index_t>{11, 13, 15}));
  const auto summary = summarize(sched);
  EXPECT_EQ(summary.max_levels, 5);
  EXPECT_DOUBLE_EQ(summary.mean_level_width, 18.0 / 10.0);
}

TEST(LevelSchedule, CoversEveryRowOnce) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 300);
    const auto layout = testing::random_layout(rng, n, 64);
    const auto m = testing::random_triangular<3>(rng, layout, Triangle::lower, DiagonalKind::unit);
    const auto sched = build_level_schedule(level_assign_lower(m, layout), layout);
    std::vector<index_t> rows = sched.rows;
    std::sort(rows.begin(), rows.end());
    for (index_t i = 0; i < n; ++i) EXPECT_EQ(rows[i], i);
    for (index_t s = 0; s < layout.count(); ++s)
      for (index_t l = 0; l < sched.level_count(s); ++l) {
        const auto lr = sched.level_rows(s, l);
        EXPECT_FALSE(lr.empty());
        EXPECT_TRUE(std::is_sorted(lr.begin(), lr.end()));
        for (index_t i : lr) EXPECT_EQ(layout.owner(i), s);
      }
  }
}

}  // namespace
}  // namespace ddtrsv
