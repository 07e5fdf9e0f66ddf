#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>

#include "ddtrsv/partition.hpp"
#include "oracles.hpp"

namespace ddtrsv {
namespace {

CsrMatrix path_graph(index_t n) {
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t i = 0; i < n; ++i)
    for (index_t j : {i - 1, i, i + 1})
      if (j >= 0 && j < n) {
        r.push_back(i);
        c.push_back(j);
        v.push_back(j == i ? 2.0 : -1.0);
      }
  return from_triplets<1>(n, n, r, c, v);
}

TEST(GeometricCuts, LabelsFollowTileIndex) {
  const GridSpec grid{4, 2, 2};
  const auto p = geometric_cuts(grid, {2, 2, 2});
  EXPECT_EQ(p.n_subdomains, 2);
  EXPECT_EQ(p.rows_per_subdomain, 8);
  for (index_t k = 0; k < 2; ++k)
    for (index_t j = 0; j < 2; ++j)
      for (index_t i = 0; i < 4; ++i) EXPECT_EQ(p.labels[grid.index(i, j, k)], i / 2);
  EXPECT_NO_THROW(validate(p));
}

TEST(GeometricCuts, TileOrderIsXFastest) {
  const GridSpec grid{4, 4, 4};
  const auto p = geometric_cuts(grid, {2, 2, 2});
  EXPECT_EQ(p.n_subdomains, 8);
  EXPECT_EQ(p.labels[grid.index(3, 0, 0)], 1);
  EXPECT_EQ(p.labels[grid.index(0, 3, 0)], 2);
  EXPECT_EQ(p.labels[grid.index(0, 0, 3)], 4);
  EXPECT_EQ(p.labels[grid.index(3, 3, 3)], 7);
}

TEST(GeometricCuts, LargeLaplacianTileCounts) {
  EXPECT_EQ(geometric_cuts({128, 128, 128}, {16, 16, 8}).n_subdomains, 1024);
  const auto p = geometric_cuts({256, 128, 128}, {16, 16, 8});
  EXPECT_EQ(p.n_subdomains, 2048);
  EXPECT_EQ(p.rows_per_subdomain, 2048);
}

TEST(GeometricCuts, RejectsIndivisibleGrid) {
  EXPECT_THROW(geometric_cuts({5, 4, 4}, {2, 2, 2}), InvalidArgument);
  EXPECT_THROW(geometric_cuts({4, 4, 4}, {0, 2, 2}), InvalidArgument);
}

TEST(GraphPartition, PathSplitsIntoConsecutivePairs) {
  const auto p = graph_partition_uniform(path_graph(8), 2);
  EXPECT_EQ(p.labels, (std::vector<index_t>{0, 0, 1, 1, 2, 2, 3, 3}));
  EXPECT_EQ(p.n_subdomains, 4);
}

TEST(GraphPartition, PartsHaveExactSize) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    for (index_t part : {1, 7, 64, 100}) {
      const auto p = graph_partition_uniform(generate_laplacian_csr({9, 8, 7}), part, seed);
      EXPECT_NO_THROW(validate(p)) << "seed " << seed << " part " << part;
      std::map<index_t, index_t> sizes;
      for (index_t l : p.labels) ++sizes[l];
      for (const auto& [label, size] : sizes)
        EXPECT_EQ(size, label + 1 < p.n_subdomains ? part : 504 - part * (p.n_subdomains - 1));
    }
  }
}

TEST(GraphPartition, DeterministicForFixedSeed) {
  const auto a = generate_laplacian_csr({6, 6, 6});
  EXPECT_EQ(graph_partition_uniform(a, 27, 5).labels, graph_partition_uniform(a, 27, 5).labels);
}

TEST(GraphPartition, HandlesDisconnectedGraph) {
  const auto p = graph_partition_uniform(identity_matrix<1>(10), 4);
  EXPECT_NO_THROW(validate(p));
  EXPECT_EQ(p.n_subdomains, 3);
}

TEST(GraphPartition, RejectsBadPartSize) {
  EXPECT_THROW(graph_partition_uniform(path_graph(4), 0), InvalidArgument);
}

TEST(PartitionLabels, ValidateRejectsUnevenSizes) {
  PartitionLabels p{{0, 0, 1, 1, 1}, 2, 2};
  EXPECT_THROW(validate(p), InvalidArgument);
  p.labels = {0, 0, 1, 1, 2};
  p.n_subdomains = 3;
  EXPECT_NO_THROW(validate(p));
  p.labels = {0, 0, 1, 1, 3};
  EXPECT_THROW(validate(p), InvalidArgument);
}

TEST(Permutation, LabelsGroupStably) {
  const PartitionLabels p{{1, 0, 1, 0}, 2, 2};
  const auto perm = labels_to_permutation(p);
  EXPECT_EQ(perm.new_to_old, (std::vector<index_t>{1, 3, 0, 2}));
  EXPECT_EQ(perm.old_to_new, (std::vector<index_t>{2, 0, 3, 1}));
  EXPECT_EQ(permute_labels(p, perm), (std::vector<index_t>{0, 0, 1, 1}));
  const auto layout = SubdomainLayout::from_labels(p);
  EXPECT_EQ(layout.count(), 2);
  EXPECT_EQ(layout.begin(1), 2);
}

TEST(Permutation, RandomMapsAreBijections) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<index_t> map(static_cast<std::size_t>(testing::uniform_int(rng, 1, 200)));
    std::iota(map.begin(), map.end(), 0);
    std::shuffle(map.begin(), map.end(), rng);
    const auto perm = Permutation::from_new_to_old(map);
    for (index_t j = 0; j < perm.size(); ++j) EXPECT_EQ(perm.old_to_new[perm.new_to_old[j]], j);
  }
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation::from_new_to_old({0, 0, 1}), InvalidArgument);
  EXPECT_THROW(Permutation::from_new_to_old({0, 3}), InvalidArgument);
}

TEST(Permutation, ExpandMovesBlocksTogether) {
  const auto perm = Permutation::from_new_to_old({1, 0}).expand(3);
  EXPECT_EQ(perm.new_to_old, (std::vector<index_t>{3, 4, 5, 0, 1, 2}));
}

TEST(SubdomainLayout, OwnerAndSizes) {
  const auto layout = SubdomainLayout::uniform(10, 4);
  EXPECT_EQ(layout.count(), 3);
  EXPECT_EQ(layout.size(2), 2);
  EXPECT_EQ(layout.max_size(), 4);
  EXPECT_EQ(layout.owner(0), 0);
  EXPECT_EQ(layout.owner(4), 1);
  EXPECT_EQ(layout.owner(9), 2);
  EXPECT_THROW(layout.owner(10), InvalidArgument);
  EXPECT_EQ(layout.owners(), (std::vector<index_t>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2}));
  EXPECT_THROW(SubdomainLayout({1, 2}), InvalidArgument);
  EXPECT_THROW(SubdomainLayout({0, 3, 2}), InvalidArgument);
}

TEST(PartitionLabels, StreamRoundTrip) {
  const auto p = geometric_cuts({4, 4, 2}, {2, 2, 2});
  std::stringstream buf;
  write_labels(p, buf);
  const auto q = read_labels(buf);
  EXPECT_EQ(q.labels, p.labels);
  EXPECT_EQ(q.n_subdomains, p.n_subdomains);
  EXPECT_EQ(q.rows_per_subdomain, p.rows_per_subdomain);
}

TEST(PartitionLabels, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ddtrsv_labels.txt";
  const auto p = graph_partition_uniform(path_graph(9), 4);
  write_labels(p, path);
  EXPECT_EQ(read_labels(path).labels, p.labels);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ddtrsv
