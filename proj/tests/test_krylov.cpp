#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ddtrsv/krylov.hpp"
#include "ddtrsv/reorder.hpp"
#include "ddtrsv/vector_ops.hpp"
#include "ddtrsv/worker_pool.hpp"
#include "oracles.hpp"

namespace ddtrsv {
namespace {

using testing::Rng;

TEST(Bicgstab, IdentitySystemConvergesInOneIteration) {
  const auto a = identity_matrix<1>(5);
  const std::vector<double> b{1, -2, 3, 0.5, 7};
  std::vector<double> x(5, 0.0);
  const auto id = make_identity_preconditioner();
  const auto rep = bicgstab(a, b, x, *id);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.status, SolveStatus::converged);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.residual_history.size(), 2u);
  EXPECT_EQ(x, b);
}

TEST(Bicgstab, TwoByTwoSpd) {
  const auto a = from_triplets<1>(2, 2, std::vector<index_t>{0, 0, 1, 1}, std::vector<index_t>{0, 1, 0, 1},
                                  std::vector<double>{4, 1, 1, 3});
  const std::vector<double> b{1, 2};
  std::vector<double> x(2, 0.0);
  const auto rep = bicgstab(a, b, x, *make_identity_preconditioner());
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-12);
  EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-12);
}

TEST(Bicgstab, ZeroRightHandSideReturnsImmediately) {
  const auto a = generate_laplacian_csr({3, 3, 3});
  const std::vector<double> b(27, 0.0);
  std::vector<double> x(27, 0.0);
  const auto rep = bicgstab(a, b, x, *make_identity_preconditioner());
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(rep.residual_history.size(), 1u);
}

TEST(Bicgstab, Ilu0OnLaplacianRecoversManufacturedSolution) {
  const auto a = generate_laplacian_csr({32, 32, 32});
  const std::vector<double> ones(a.rows(), 1.0);
  const auto b = spmv(a, ones);
  WorkerPool pool(2);
  const auto m = make_ilu0_preconditioner(a, SubdomainLayout::single(a.n_block_rows), SolveStrategy::reference, &pool);
  std::vector<double> x(a.rows(), 0.0);
  const auto rep = bicgstab(a, b, x, *m, {}, &pool);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.residual_history.size(), static_cast<std::size_t>(rep.iterations + 1));
  EXPECT_LE(testing::inf_diff(x, ones), 1e-6);
  EXPECT_LE(rep.true_relative_residual, 1e-7);
}

TEST(Bicgstab, NonzeroInitialGuess) {
  Rng rng(3);
  const auto a = testing::random_dominant_matrix(rng, 80, 5);
  const auto b = testing::random_vector(rng, 80);
  auto x = testing::random_vector(rng, 80);
  const auto m = make_ilu0_preconditioner(a, SubdomainLayout::single(80), SolveStrategy::reference, nullptr);
  BicgstabConfig cfg;
  cfg.tol = 1e-10;
  const auto rep = bicgstab(a, b, x, *m, cfg);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.true_relative_residual, 1e-8);
}

TEST(Bicgstab, MatchesTextbookRecurrences) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const index_t n = testing::uniform_int(rng, 5, 200);
    const auto a = testing::random_dominant_matrix(rng, n, 6);
    const auto b = testing::random_vector(rng, n);
    std::vector<double> x(n, 0.0);
    BicgstabConfig cfg;
    cfg.tol = 1e-10;
    const auto rep = bicgstab(a, b, x, *make_identity_preconditioner(), cfg);
    ASSERT_GE(rep.iterations, 1);
    const auto steps = testing::textbook_bicgstab(a, b, std::vector<double>(n, 0.0), rep.iterations);
    for (index_t j = 0; j < rep.iterations; ++j) {
      EXPECT_NEAR(rep.trace[j].rho, steps[j].rho, 1e-12 * std::abs(steps[j].rho));
      EXPECT_NEAR(rep.trace[j].alpha, steps[j].alpha, 1e-12 * std::abs(steps[j].alpha));
      if (rep.trace[j].omega != 0.0)
        EXPECT_NEAR(rep.trace[j].omega, steps[j].omega, 1e-12 * std::abs(steps[j].omega));
    }
  }
}

TEST(Bicgstab, MaxIterationsIsReported) {
  const auto a = generate_laplacian_csr({10, 10, 10});
  const std::vector<double> b(a.rows(), 1.0);
  std::vector<double> x(a.rows(), 0.0);
  BicgstabConfig cfg;
  cfg.max_iter = 2;
  const auto rep = bicgstab(a, b, x, *make_identity_preconditioner(), cfg);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.status, SolveStatus::max_iterations);
  EXPECT_EQ(rep.iterations, 2);
}

TEST(Bicgstab, BreakdownIsReported) {
  // Rotation: r0 . A r0 = 0, so v . r0 vanishes at the first step.
  const auto a = from_triplets<1>(2, 2, std::vector<index_t>{0, 1}, std::vector<index_t>{1, 0},
                                  std::vector<double>{-1, 1});
  const std::vector<double> b{1, 0};
  std::vector<double> x(2, 0.0);
  const auto rep = bicgstab(a, b, x, *make_identity_preconditioner());
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.status, SolveStatus::breakdown);
  ASSERT_TRUE(rep.breakdown_reason.has_value());
  EXPECT_EQ(*rep.breakdown_reason, "v.r0");
}

TEST(Bicgstab, AbsoluteToleranceMode) {
  const auto a = generate_laplacian_csr({6, 6, 6});
  const std::vector<double> b(a.rows(), 1e3);
  std::vector<double> x(a.rows(), 0.0);
  BicgstabConfig cfg;
  cfg.absolute = true;
  cfg.tol = 1e-6;
  const auto rep = bicgstab(a, b, x, *make_identity_preconditioner(), cfg);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.residual_history.back(), 1e-6);
}

TEST(Bicgstab, RejectsBadConfig) {
  const auto a = identity_matrix<1>(2);
  std::vector<double> b{1, 1}, x(2);
  BicgstabConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(bicgstab(a, b, x, *make_identity_preconditioner(), cfg), InvalidArgument);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(bicgstab(a, b, x, *make_identity_preconditioner(), cfg), InvalidArgument);
  std::vector<double> short_b{1};
  EXPECT_THROW(bicgstab(a, short_b, x, *make_identity_preconditioner()), DimensionError);
}

TEST(Preconditioner, IdentityIsExactNoOp) {
  const auto id = make_identity_preconditioner();
  const std::vector<double> v{1.5, -2.0, 1e-300};
  std::vector<double> out(3);
  id->apply_left(v, out);
  EXPECT_EQ(out, v);
  id->apply_right_inverse(v, out);
  EXPECT_EQ(out, v);
  id->apply_right(v, out);
  EXPECT_EQ(out, v);
}

TEST(Preconditioner, Ilu0OnIdentityMatrixIsNoOp) {
  const auto m = make_ilu0_preconditioner(identity_matrix<3>(4), SubdomainLayout::uniform(4, 2),
                                          SolveStrategy::level_vc, nullptr);
  std::vector<double> v(12);
  std::iota(v.begin(), v.end(), 1.0);
  std::vector<double> out(12);
  m->apply_left(v, out);
  EXPECT_EQ(out, v);
  m->apply_right_inverse(v, out);
  EXPECT_EQ(out, v);
}

TEST(Preconditioner, Ilu0RoundTrips) {
  Rng rng(5);
  const auto a = testing::random_dominant_matrix(rng, 150, 5);
  const auto m = make_ilu0_preconditioner(a, SubdomainLayout::single(150), SolveStrategy::reference, nullptr);
  const auto x = testing::random_vector(rng, 150);
  std::vector<double> kx(150), back(150);
  m->apply_right(x, kx);
  m->apply_right_inverse(kx, back);
  EXPECT_LE(testing::relative_inf_diff(back, x), 1e-12);
}

TEST(Preconditioner, DecomposedApplyEqualsIndependentSubdomainApplies) {
  const GridSpec g{16, 16, 16};
  const auto labels = geometric_cuts(g, {8, 8, 4});
  const auto layout = SubdomainLayout::from_labels(labels);
  const auto a = drop_inter_partition(reorder(generate_laplacian_csr(g), labels_to_permutation(labels)), layout).first;
  WorkerPool pool(4);
  const auto m = make_ilu0_preconditioner(a, layout, SolveStrategy::level_vc, &pool);
  Rng rng(6);
  const auto b = testing::random_vector(rng, a.rows());
  std::vector<double> full(b.size());
  m->apply_left(b, full);

  for (index_t s = 0; s < layout.count(); ++s) {
    // Extract the diagonal block of subdomain s and solve it alone.
    const index_t first = layout.begin(s), size = layout.size(s);
    std::vector<index_t> r, c;
    std::vector<double> v;
    for (index_t i = 0; i < size; ++i)
      for (index_t k = a.row_ptr[first + i]; k < a.row_ptr[first + i + 1]; ++k) {
        r.push_back(i);
        c.push_back(a.col_idx[k] - first);
        v.push_back(a.values[k]);
      }
    const auto local = from_triplets<1>(size, size, r, c, v);
    const auto lm = make_ilu0_preconditioner(local, SubdomainLayout::single(size), SolveStrategy::reference, nullptr);
    std::vector<double> lb(b.begin() + first, b.begin() + first + size), lx(size);
    lm->apply_left(lb, lx);
    EXPECT_EQ(lx, std::vector<double>(full.begin() + first, full.begin() + first + size));
  }
}

TEST(Preconditioner, FusedAndUnfusedIldu0GiveIdenticalHistories) {
  const GridSpec g{16, 16, 16};
  const auto labels = geometric_cuts(g, {8, 8, 4});
  const auto layout = SubdomainLayout::from_labels(labels);
  const auto a = reorder(generate_laplacian_csr(g), labels_to_permutation(labels));
  const auto d = drop_inter_partition(a, layout).first;
  WorkerPool pool(4);
  const auto f = ildu0(ilu0(d, layout, &pool));
  const auto fused = make_ildu0_fused_preconditioner(f, layout, Traversal::vertex_centric, &pool);
  const auto unfused = make_ildu0_unfused_preconditioner(f, layout, Traversal::vertex_centric, &pool);
  const std::vector<double> ones(a.rows(), 1.0);
  const auto b = spmv(a, ones);
  std::vector<double> x1(a.rows(), 0.0), x2(a.rows(), 0.0);
  const auto r1 = bicgstab(a, b, x1, *fused, {}, &pool);
  const auto r2 = bicgstab(a, b, x2, *unfused, {}, &pool);
  EXPECT_TRUE(r1.converged);
  EXPECT_EQ(r1.iterations, r2.iterations);
  EXPECT_EQ(r1.residual_history, r2.residual_history);
  EXPECT_EQ(x1, x2);
  EXPECT_EQ(fused->name(), "ildu0_fused");
}

TEST(Permute, IdentityAndSwap) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(permute_rhs(Permutation::identity(4), v), v);
  const auto swap = Permutation::from_new_to_old({1, 0, 2, 3});
  EXPECT_EQ(permute_rhs(swap, permute_rhs(swap, v)), v);
  EXPECT_EQ(permute_rhs(swap, v), (std::vector<double>{2, 1, 3, 4}));
}

TEST(Permute, RandomRoundTripIsBitwise) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const index_t n = testing::uniform_int(rng, 1, 100);
    std::vector<index_t> map(n);
    std::iota(map.begin(), map.end(), 0);
    std::shuffle(map.begin(), map.end(), rng);
    const auto perm = Permutation::from_new_to_old(map);
    const auto v = testing::random_vector(rng, 3 * n);
    EXPECT_EQ(unpermute_solution(perm, permute_rhs(perm, v, 3), 3), v);
  }
}

TEST(Permute, MatchesReorderedOperator) {
  // (P A P^T)(P x) = P (A x), up to the order each row sums its terms
  Rng rng(8);
  const auto a = generate_laplacian_bsr({4, 3, 2});
  const auto perm = labels_to_permutation(geometric_cuts({4, 3, 2}, {2, 3, 1}));
  const auto x = testing::random_vector(rng, a.rows());
  EXPECT_LE(testing::inf_diff(spmv(reorder(a, perm), permute_rhs(perm, x, 3)), permute_rhs(perm, spmv(a, x), 3)),
            1e-14);
}

}  // namespace
}  // namespace ddtrsv
