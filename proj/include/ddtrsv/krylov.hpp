#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddtrsv/factor.hpp"
#include "ddtrsv/partition.hpp"
#include "ddtrsv/schedule.hpp"
#include "ddtrsv/sparse_matrix.hpp"
#include "ddtrsv/trisolve.hpp"

namespace ddtrsv {

class WorkerPool;

struct BicgstabConfig {
  double tol = 1e-8;
  index_t max_iter = 1000;
  /// Threshold on |rho|, |v.r0|, |t.t| and |omega| below which the
  /// iteration stops with a breakdown.
  double breakdown_eps = 1e-30;
  /// Compare residual norms against tol directly instead of tol * |r0|.
  bool absolute = false;

  void validate() const;
};

/// Split preconditioner M = K1 K2. The solver iterates on K1^-1 A K2^-1.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;

  virtual std::string_view name() const noexcept = 0;
  /// out = K1^-1 in
  virtual void apply_left(std::span<const double> in, std::span<double> out) const = 0;
  /// out = K2^-1 in
  virtual void apply_right_inverse(std::span<const double> in, std::span<double> out) const = 0;
  /// out = K2 in (used once to map the initial guess)
  virtual void apply_right(std::span<const double> in, std::span<double> out) const = 0;
};

std::unique_ptr<Preconditioner> make_identity_preconditioner();

/// ILU0 of a (decomposed) matrix with K1 = L (unit lower) and K2 = U.
/// Factorization runs per subdomain of `layout`; each apply uses `strategy`.
template <int B>
std::unique_ptr<Preconditioner> make_ilu0_preconditioner(const BlockSparseMatrix<B>& a_decomposed,
                                                         const SubdomainLayout& layout, SolveStrategy strategy,
                                                         WorkerPool* pool, const TrisolveOptions& options = {},
                                                         const FactorOptions& factor_options = {});

/// ILDU0 as a right preconditioner: K1 = I, K2 = L D U_unit, so every K2^-1
/// is a single fused apply over each subdomain.
template <int B>
std::unique_ptr<Preconditioner> make_ildu0_fused_preconditioner(IlduFactors<B> factors, const SubdomainLayout& layout,
                                                                Traversal traversal, WorkerPool* pool,
                                                                const TrisolveOptions& options = {});

/// Same operator and wiring as the fused variant, applied as three passes.
template <int B>
std::unique_ptr<Preconditioner> make_ildu0_unfused_preconditioner(IlduFactors<B> factors,
                                                                  const SubdomainLayout& layout,
                                                                  Traversal traversal, WorkerPool* pool,
                                                                  const TrisolveOptions& options = {});

enum class SolveStatus { converged, max_iterations, breakdown };

std::string_view to_string(SolveStatus s) noexcept;

struct IterationTrace {
  double rho = 0.0;
  double alpha = 0.0;
  double omega = 0.0;  // zero when the iteration exited at the half step
};

struct SolveTimings {
  double spmv_ms = 0.0;
  double precond_ms = 0.0;
  double blas1_ms = 0.0;
};

struct SolveReport {
  index_t iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::optional<std::string> breakdown_reason;
  /// Preconditioned residual norm: initial value, then one per iteration.
  std::vector<double> residual_history;
  std::vector<IterationTrace> trace;
  /// |b - A x| / |b| of the returned x.
  double true_relative_residual = 0.0;
  SolveTimings timings;
};

/// Preconditioned BiCGSTAB. `x` holds the initial guess on entry and the
/// solution on exit. Breakdown and the iteration cap are reported in the
/// returned status rather than thrown.
template <int B>
SolveReport bicgstab(const BlockSparseMatrix<B>& a, std::span<const double> b, std::span<double> x,
                     const Preconditioner& m, const BicgstabConfig& config = {}, WorkerPool* pool = nullptr);

template <int B>
double relative_residual(const BlockSparseMatrix<B>& a, std::span<const double> b, std::span<const double> x,
                         WorkerPool* pool = nullptr);

/// Gathers an original-order vector into the reordered numbering.
DenseVector permute_rhs(const Permutation& perm, std::span<const double> v, int block_dim = 1);
/// Scatters a reordered-numbering vector back to the original order.
DenseVector unpermute_solution(const Permutation& perm, std::span<const double> v, int block_dim = 1);

}  // namespace ddtrsv
