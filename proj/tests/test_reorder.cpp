#include <gtest/gtest.h>

#include <numeric>

#include "ddtrsv/reorder.hpp"
#include "ddtrsv/worker_pool.hpp"
#include "oracles.hpp"

namespace ddtrsv {
namespace {

// Dense P A P^T computed entry by entry from the permutation.
std::vector<double> dense_permuted(const CsrMatrix& a, const Permutation& perm) {
  const index_t n = a.n_block_rows;
  const auto d = to_dense(a);
  std::vector<double> out(static_cast<std::size_t>(n * n));
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < n; ++j) out[i * n + j] = d[perm.new_to_old[i] * n + perm.new_to_old[j]];
  return out;
}

TEST(Reorder, MatchesDensePermutation) {
  testing::Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 60);
    const auto a = testing::random_dominant_matrix(rng, n, 4);
    std::vector<index_t> map(static_cast<std::size_t>(n));
    std::iota(map.begin(), map.end(), 0);
    std::shuffle(map.begin(), map.end(), rng);
    const auto perm = Permutation::from_new_to_old(map);
    const auto b = reorder(a, perm);
    EXPECT_NO_THROW(validate(b));
    EXPECT_EQ(to_dense(b), dense_permuted(a, perm));
  }
}

TEST(Reorder, IdentityPermutationIsNoOp) {
  const auto a = generate_laplacian_bsr({3, 3, 2});
  EXPECT_EQ(reorder(a, Permutation::identity(a.n_block_rows)), a);
}

TEST(Reorder, BlocksTravelIntact) {
  testing::Rng rng(8);
  auto a = generate_laplacian_bsr({3, 2, 2});
  for (auto& v : a.values) v = testing::uniform(rng, -1.0, 1.0);
  std::vector<index_t> map(static_cast<std::size_t>(a.n_block_rows));
  std::iota(map.rbegin(), map.rend(), 0);
  const auto perm = Permutation::from_new_to_old(map);
  EXPECT_EQ(bsr_to_csr(reorder(a, perm)), reorder(bsr_to_csr(a), perm.expand(3)));
}

TEST(Reorder, ParallelMatchesSerial) {
  const auto a = generate_laplacian_csr({10, 10, 10});
  const auto perm = labels_to_permutation(geometric_cuts({10, 10, 10}, {5, 5, 2}));
  WorkerPool pool(4);
  EXPECT_EQ(reorder(a, perm, &pool), reorder(a, perm));
}

TEST(Reorder, RejectsSizeMismatch) {
  EXPECT_THROW(reorder(identity_matrix<1>(3), Permutation::identity(4)), DimensionError);
}

TEST(DropInterPartition, TridiagonalPairsDropSixOfTwentyTwo) {
  // 8 rows, 22 entries; 3 subdomain boundaries each cut 2 entries.
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t i = 0; i < 8; ++i)
    for (index_t j = std::max<index_t>(0, i - 1); j <= std::min<index_t>(7, i + 1); ++j) {
      r.push_back(i);
      c.push_back(j);
      v.push_back(j == i ? 2.0 : -1.0);
    }
  const auto a = from_triplets<1>(8, 8, r, c, v);
  const auto [d, stats] = drop_inter_partition(a, SubdomainLayout::uniform(8, 2));
  EXPECT_EQ(stats.nnz_before, 22);
  EXPECT_EQ(stats.dropped, 6);
  EXPECT_EQ(stats.nnz_after, 16);
  EXPECT_NEAR(stats.dropped_fraction, 6.0 / 22.0, 1e-15);
  EXPECT_NEAR(100.0 * stats.dropped_fraction, 27.27, 0.005);
  EXPECT_EQ(d.nnz(), 16);
}

TEST(DropInterPartition, BlockDiagonalDropsNothing) {
  const auto a = identity_matrix<3>(6);
  const auto [d, stats] = drop_inter_partition(a, SubdomainLayout::uniform(6, 2));
  EXPECT_EQ(stats.dropped, 0);
  EXPECT_EQ(stats.dropped_fraction, 0.0);
  EXPECT_EQ(d, a);
}

TEST(DropInterPartition, OwnerVectorMatchesLayout) {
  const GridSpec g{6, 4, 4};
  const auto a = generate_laplacian_csr(g);
  const auto labels = geometric_cuts(g, {3, 2, 2});
  const auto perm = labels_to_permutation(labels);
  const auto [by_owner, s1] = drop_inter_partition(a, labels.labels);
  const auto [by_layout, s2] = drop_inter_partition(reorder(a, perm), SubdomainLayout::from_labels(labels));
  EXPECT_EQ(s1.dropped, s2.dropped);
  EXPECT_EQ(reorder(by_owner, perm), by_layout);
}

TEST(DropInterPartition, RejectsShortOwnerVector) {
  const std::vector<index_t> owner{0, 0};
  EXPECT_THROW(drop_inter_partition(identity_matrix<1>(3), owner), DimensionError);
}

TEST(LaplacianStats, StreamingCountMatchesMaterializedPipeline) {
  for (const auto& [grid, tile] : {std::pair{GridSpec{8, 8, 8}, GridSpec{4, 4, 2}},
                                   std::pair{GridSpec{6, 4, 2}, GridSpec{3, 2, 1}},
                                   std::pair{GridSpec{16, 8, 8}, GridSpec{4, 4, 4}}}) {
    const auto a = generate_laplacian_bsr(grid);
    const auto labels = geometric_cuts(grid, tile);
    const auto [d, stats] = drop_inter_partition(reorder(a, labels_to_permutation(labels)),
                                                 SubdomainLayout::from_labels(labels));
    const auto streamed = laplacian_decomposition_stats(grid, tile, 3);
    EXPECT_EQ(streamed.nnz_before, stats.nnz_before);
    EXPECT_EQ(streamed.nnz_after, stats.nnz_after);
    EXPECT_EQ(streamed.dropped, stats.dropped);
  }
}

TEST(LaplacianStats, CubeOf128WithTallTiles) {
  const auto s = laplacian_decomposition_stats({128, 128, 128}, {16, 16, 8}, 3);
  EXPECT_EQ(s.nnz_before, 131235840);
  EXPECT_EQ(s.dropped, 8552448);
  EXPECT_EQ(s.nnz_after, 122683392);
  EXPECT_NEAR(100.0 * s.dropped_fraction, 6.52, 0.005);
}

TEST(LaplacianStats, DoubledGridWithTallTiles) {
  const auto s = laplacian_decomposition_stats({256, 128, 128}, {16, 16, 8}, 3);
  EXPECT_EQ(s.nnz_before, 262766592);
  EXPECT_EQ(s.nnz_after, 245366784);
  EXPECT_NEAR(100.0 * s.dropped_fraction, 6.62, 0.005);
}

}  // namespace
}  // namespace ddtrsv
