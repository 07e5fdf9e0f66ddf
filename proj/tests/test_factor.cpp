#include <gtest/gtest.h>

#include "ddtrsv/dense_block.hpp"
#include "ddtrsv/factor.hpp"
#include "ddtrsv/reorder.hpp"
#include "ddtrsv/trisolve.hpp"
#include "ddtrsv/worker_pool.hpp"
#include "oracles.hpp"

namespace ddtrsv {
namespace {

using testing::Rng;

template <int B>
BlockSparseMatrix<B> dense_pattern_matrix(Rng& rng, index_t n) {
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < n; ++j) {
      r.push_back(i);
      c.push_back(j);
      for (int a = 0; a < B; ++a)
        for (int b = 0; b < B; ++b) {
          const bool diag = i == j && a == b;
          v.push_back(diag ? static_cast<double>(n * B) + testing::uniform(rng, 1.0, 2.0)
                           : testing::uniform(rng, -1.0, 1.0));
        }
    }
  return from_triplets<B>(n, n, r, c, v);
}

template <int B>
std::vector<double> dense_product(const IluFactors<B>& f) {
  const index_t n = f.lower.rows();
  return testing::dense_multiply(testing::dense_triangle(lower_unit(f.lower)),
                                 testing::dense_triangle(upper_stored(f.upper)), n);
}

TEST(Ilu0, FullPatternEqualsDenseLu) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 40);
    const auto a = dense_pattern_matrix<1>(rng, n);
    const auto f = ilu0(a);
    const auto lu = testing::dense_lu(to_dense(a), n);
    EXPECT_LT(testing::frobenius_relative(testing::dense_triangle(lower_unit(f.lower)), lu.l), 1e-10);
    EXPECT_LT(testing::frobenius_relative(testing::dense_triangle(upper_stored(f.upper)), lu.u), 1e-10);
  }
}

TEST(Ilu0, BlockFullPatternReproducesMatrix) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 12);
    const auto a = dense_pattern_matrix<3>(rng, n);
    EXPECT_LT(testing::frobenius_relative(dense_product(ilu0(a)), to_dense(a)), 1e-12);
  }
}

TEST(Ilu0, KeepsPatternAndMatchesOnPattern) {
  // (L U)_ij equals a_ij on every stored position of A.
  const auto a = generate_laplacian_csr({4, 4, 3});
  const auto f = ilu0(a);
  EXPECT_EQ(f.lower.nnz() + f.upper.nnz(), a.nnz());
  const auto prod = dense_product(f);
  const index_t n = a.n_block_rows;
  for (index_t i = 0; i < n; ++i)
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      EXPECT_NEAR(prod[i * n + a.col_idx[k]], a.values[k], 1e-12);
}

TEST(Ilu0, TridiagonalIsExact) {
  const auto a = generate_laplacian_csr({9, 1, 1});
  const auto f = ilu0(a);
  EXPECT_LT(testing::frobenius_relative(dense_product(f), to_dense(a)), 1e-15);
  // u_00 = 6, l_10 = -1/6, u_11 = 6 - 1/6
  EXPECT_EQ(f.upper.values[0], 6.0);
  EXPECT_DOUBLE_EQ(f.lower.values[0], -1.0 / 6.0);
  EXPECT_DOUBLE_EQ(f.upper.values[f.upper.row_ptr[1]], 6.0 - 1.0 / 6.0);
}

TEST(Ilu0, UpperStoresDiagonalFirst) {
  const auto f = ilu0(generate_laplacian_bsr({3, 3, 3}));
  for (index_t i = 0; i < f.upper.n_block_rows; ++i) EXPECT_EQ(f.upper.col_idx[f.upper.row_ptr[i]], i);
  for (index_t i = 0; i < f.lower.n_block_rows; ++i)
    for (index_t k = f.lower.row_ptr[i]; k < f.lower.row_ptr[i + 1]; ++k) EXPECT_LT(f.lower.col_idx[k], i);
}

TEST(Ilu0, SubdomainParallelIsBitwiseSerial) {
  const GridSpec g{8, 8, 4};
  const auto labels = geometric_cuts(g, {4, 4, 2});
  const auto layout = SubdomainLayout::from_labels(labels);
  {
    const auto a = reorder(generate_laplacian_bsr(g), labels_to_permutation(labels));
    const auto d = drop_inter_partition(a, layout).first;
    WorkerPool pool(4);
    const auto serial = ilu0(d);
    const auto parallel = ilu0(d, layout, &pool);
    EXPECT_EQ(serial.lower, parallel.lower);
    EXPECT_EQ(serial.upper, parallel.upper);
  }
}

TEST(Ilu0, ParallelRejectsCoupledMatrix) {
  const auto a = generate_laplacian_csr({4, 1, 1});
  EXPECT_THROW(ilu0(a, SubdomainLayout::uniform(4, 2), nullptr), DecompositionError);
}

TEST(Ilu0, MissingDiagonalIsReported) {
  const auto a = from_triplets<1>(2, 2, std::vector<index_t>{0, 1}, std::vector<index_t>{1, 1},
                                  std::vector<double>{1.0, 1.0});
  try {
    ilu0(a);
    FAIL();
  } catch (const FactorizationError& e) {
    EXPECT_EQ(e.kind(), FactorizationError::Kind::missing_diagonal);
    EXPECT_EQ(e.row(), 0);
  }
}

TEST(Ilu0, ZeroPivotIsReported) {
  // [[1,1],[1,1]] has u_11 = 0.
  const auto a = from_triplets<1>(2, 2, std::vector<index_t>{0, 0, 1, 1}, std::vector<index_t>{0, 1, 0, 1},
                                  std::vector<double>{1, 1, 1, 1});
  try {
    ilu0(a);
    FAIL();
  } catch (const FactorizationError& e) {
    EXPECT_EQ(e.kind(), FactorizationError::Kind::zero_pivot);
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(Ilu0, SingularBlockIsReported) {
  auto a = identity_matrix<3>(2);
  a.values[9 + 8] = 0.0;  // third diagonal entry of block row 1
  try {
    ilu0(a);
    FAIL();
  } catch (const FactorizationError& e) {
    EXPECT_EQ(e.kind(), FactorizationError::Kind::singular_pivot_block);
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(Ildu0, ReassemblesLu) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = dense_pattern_matrix<3>(rng, testing::uniform_int(rng, 1, 8));
    const auto f = ilu0(a);
    const auto g = ildu0(f);
    const index_t n = a.rows();
    std::vector<double> d(static_cast<std::size_t>(n * n), 0.0);
    for (index_t i = 0; i < a.n_block_rows; ++i) {
      const auto inv = block::inverse<3>(block::ConstBlockSpan<3>(g.inv_diag.data() + 9 * i, 9));
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) d[(3 * i + r) * n + 3 * i + c] = inv[r * 3 + c];
    }
    const auto ldu = testing::dense_multiply(
        testing::dense_multiply(testing::dense_triangle(lower_unit(g.lower)), d, n),
        testing::dense_triangle(upper_unit(g.upper_unit)), n);
    EXPECT_LT(testing::frobenius_relative(ldu, dense_product(f)), 1e-12);
  }
}

TEST(Ildu0, ScalarScalesRowsByInverseDiagonal) {
  const auto f = ilu0(generate_laplacian_csr({3, 1, 1}));
  const auto g = ildu0(f);
  EXPECT_EQ(g.inv_diag[0], 1.0 / 6.0);
  EXPECT_EQ(g.upper_unit.values[0], -1.0 * (1.0 / 6.0));
  EXPECT_EQ(g.lower, f.lower);
  EXPECT_EQ(g.upper_unit.nnz() + g.upper_unit.n_block_rows, f.upper.nnz());
}

}  // namespace
}  // namespace ddtrsv
