#include "ddtrsv/krylov.hpp"

#include <chrono>
#include <cmath>

#include "ddtrsv/dense_block.hpp"
#include "ddtrsv/vector_ops.hpp"
#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv {

namespace {

class IdentityPreconditioner final : public Preconditioner {
 public:
  std::string_view name() const noexcept override { return "none"; }
  void apply_left(std::span<const double> in, std::span<double> out) const override { vec::copy(in, out); }
  void apply_right_inverse(std::span<const double> in, std::span<double> out) const override { vec::copy(in, out); }
  void apply_right(std::span<const double> in, std::span<double> out) const override { vec::copy(in, out); }
};

template <int B>
class Ilu0Preconditioner final : public Preconditioner {
 public:
  Ilu0Preconditioner(IluFactors<B> factors, const SubdomainLayout& layout, SolveStrategy strategy, WorkerPool* pool,
                     const TrisolveOptions& options)
      : factors_(std::move(factors)),
        lower_(lower_unit(factors_.lower), layout, strategy, pool, options),
        upper_(upper_stored(factors_.upper), layout, strategy, pool, options) {}

  std::string_view name() const noexcept override { return "ilu0"; }
  void apply_left(std::span<const double> in, std::span<double> out) const override { lower_.solve(in, out); }
  void apply_right_inverse(std::span<const double> in, std::span<double> out) const override {
    upper_.solve(in, out);
  }
  void apply_right(std::span<const double> in, std::span<double> out) const override {
    triangular_multiply(upper_stored(factors_.upper), in, out);
  }

 private:
  IluFactors<B> factors_;
  TriangularSolver<B> lower_;
  TriangularSolver<B> upper_;
};

template <int B>
class Ildu0Preconditioner final : public Preconditioner {
 public:
  Ildu0Preconditioner(IlduFactors<B> factors, const SubdomainLayout& layout, Traversal traversal, WorkerPool* pool,
                      const TrisolveOptions& options, bool fused)
      : f_(std::move(factors)),
        lower_sched_(make_level_schedule(lower_unit(f_.lower), layout, pool, options)),
        upper_sched_(make_level_schedule(upper_unit(f_.upper_unit), layout, pool, options)),
        traversal_(traversal),
        pool_(pool),
        options_(options),
        fused_(fused) {
    constexpr int bs = B * B;
    diag_.resize(f_.inv_diag.size());
    for (index_t i = 0; i < f_.lower.n_block_rows; ++i) {
      const auto d = block::inverse<B>(block::ConstBlockSpan<B>(f_.inv_diag.data() + i * bs, bs));
      std::copy(d.begin(), d.end(), diag_.begin() + i * bs);
    }
  }

  std::string_view name() const noexcept override { return fused_ ? "ildu0_fused" : "ildu0"; }
  void apply_left(std::span<const double> in, std::span<double> out) const override { vec::copy(in, out); }
  void apply_right_inverse(std::span<const double> in, std::span<double> out) const override {
    if (fused_) {
      apply_ildu0_fused(f_, lower_sched_, upper_sched_, in, out, pool_, traversal_, options_);
    } else {
      apply_ildu0_unfused(f_, lower_sched_, upper_sched_, in, out, pool_, traversal_, options_);
    }
  }
  void apply_right(std::span<const double> in, std::span<double> out) const override {
    DenseVector tmp(in.size());
    triangular_multiply(upper_unit(f_.upper_unit), in, tmp);
    scale_by_inverse_diagonal<B>(diag_, tmp);
    triangular_multiply(lower_unit(f_.lower), std::span<const double>(tmp), out);
  }

 private:
  IlduFactors<B> f_;
  std::vector<double> diag_;
  LevelSchedule lower_sched_;
  LevelSchedule upper_sched_;
  Traversal traversal_;
  WorkerPool* pool_;
  TrisolveOptions options_;
  bool fused_;
};

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  explicit Stopwatch(double& sink) : sink_(sink), start_(Clock::now()) {}
  ~Stopwatch() { sink_ += std::chrono::duration<double, std::milli>(Clock::now() - start_).count(); }

 private:
  double& sink_;
  Clock::time_point start_;
};

}  // namespace

void BicgstabConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(breakdown_eps >= 0.0)) throw InvalidArgument("breakdown_eps must be non-negative");
}

std::unique_ptr<Preconditioner> make_identity_preconditioner() { return std::make_unique<IdentityPreconditioner>(); }

template <int B>
std::unique_ptr<Preconditioner> make_ilu0_preconditioner(const BlockSparseMatrix<B>& a_decomposed,
                                                         const SubdomainLayout& layout, SolveStrategy strategy,
                                                         WorkerPool* pool, const TrisolveOptions& options,
                                                         const FactorOptions& factor_options) {
  return std::make_unique<Ilu0Preconditioner<B>>(ilu0(a_decomposed, layout, pool, factor_options), layout, strategy,
                                                 pool, options);
}

template <int B>
std::unique_ptr<Preconditioner> make_ildu0_fused_preconditioner(IlduFactors<B> factors, const SubdomainLayout& layout,
                                                                Traversal traversal, WorkerPool* pool,
                                                                const TrisolveOptions& options) {
  return std::make_unique<Ildu0Preconditioner<B>>(std::move(factors), layout, traversal, pool, options, true);
}

template <int B>
std::unique_ptr<Preconditioner> make_ildu0_unfused_preconditioner(IlduFactors<B> factors,
                                                                  const SubdomainLayout& layout,
                                                                  Traversal traversal, WorkerPool* pool,
                                                                  const TrisolveOptions& options) {
  return std::make_unique<Ildu0Preconditioner<B>>(std::move(factors), layout, traversal, pool, options, false);
}

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::breakdown: return "breakdown";
  }
  return "unknown";
}

template <int B>
double relative_residual(const BlockSparseMatrix<B>& a, std::span<const double> b, std::span<const double> x,
                         WorkerPool* pool) {
  DenseVector r = spmv(a, x, pool);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bn = vec::norm2(b, pool);
  const double rn = vec::norm2(r, pool);
  return bn > 0.0 ? rn / bn : rn;
}

template <int B>
SolveReport bicgstab(const BlockSparseMatrix<B>& a, std::span<const double> b, std::span<double> x,
                     const Preconditioner& m, const BicgstabConfig& config, WorkerPool* pool) {
  config.validate();
  if (a.n_block_rows != a.n_block_cols) throw DimensionError("BiCGSTAB needs a square matrix");
  const auto n = static_cast<std::size_t>(a.rows());
  if (b.size() != n || x.size() != n) throw DimensionError("BiCGSTAB operand length mismatch");

  SolveReport report;
  auto& tm = report.timings;
  DenseVector tmp(n), tmp2(n);

  // out = K1^-1 A K2^-1 in
  auto op = [&](std::span<const double> in, std::span<double> out) {
    {
      Stopwatch w(tm.precond_ms);
      m.apply_right_inverse(in, tmp);
    }
    {
      Stopwatch w(tm.spmv_ms);
      spmv(a, std::span<const double>(tmp), tmp2, pool);
    }
    Stopwatch w(tm.precond_ms);
    m.apply_left(tmp2, out);
  };
  auto dot = [&](std::span<const double> u, std::span<const double> v) {
    Stopwatch w(tm.blas1_ms);
    return vec::dot(u, v, pool);
  };

  DenseVector y(n), r(n), p(n), v(n), s(n), t(n);
  {
    Stopwatch w(tm.precond_ms);
    m.apply_right(x, y);
    m.apply_right_inverse(y, tmp);
  }
  {
    Stopwatch w(tm.spmv_ms);
    spmv(a, std::span<const double>(tmp), tmp2, pool);
  }
  for (std::size_t i = 0; i < n; ++i) tmp2[i] = b[i] - tmp2[i];
  {
    Stopwatch w(tm.precond_ms);
    m.apply_left(tmp2, r);
  }
  const DenseVector r0 = r;
  p = r;
  double rho = dot(r, r0);
  const double r0_norm = std::sqrt(dot(r, r));
  report.residual_history.push_back(r0_norm);
  const double threshold = config.absolute ? config.tol : config.tol * r0_norm;

  auto stop = [&](SolveStatus status, std::string reason = {}) {
    report.status = status;
    report.converged = status == SolveStatus::converged;
    if (!reason.empty()) report.breakdown_reason = std::move(reason);
  };

  if (r0_norm == 0.0 || r0_norm < threshold) {
    stop(SolveStatus::converged);
  } else {
    stop(SolveStatus::max_iterations);
    for (index_t j = 0; j < config.max_iter; ++j) {
      if (std::abs(rho) < config.breakdown_eps) {
        stop(SolveStatus::breakdown, "rho");
        break;
      }
      op(p, v);
      const double vr0 = dot(v, r0);
      if (std::abs(vr0) < config.breakdown_eps) {
        stop(SolveStatus::breakdown, "v.r0");
        break;
      }
      const double alpha = rho / vr0;
      {
        Stopwatch w(tm.blas1_ms);
        vec::add_scaled(r, -alpha, v, s, pool);
      }
      const double s_norm = std::sqrt(dot(s, s));
      if (s_norm < threshold) {
        Stopwatch w(tm.blas1_ms);
        vec::axpy(alpha, p, y, pool);
        report.iterations = j + 1;
        report.residual_history.push_back(s_norm);
        report.trace.push_back({rho, alpha, 0.0});
        stop(SolveStatus::converged);
        break;
      }

      op(s, t);
      const double tt = dot(t, t);
      if (std::abs(tt) < config.breakdown_eps) {
        stop(SolveStatus::breakdown, "t.t");
        break;
      }
      const double omega = dot(t, s) / tt;
      {
        Stopwatch w(tm.blas1_ms);
        vec::axpy(alpha, p, y, pool);
        vec::axpy(omega, s, y, pool);
        vec::add_scaled(s, -omega, t, r, pool);
      }
      const double r_norm = std::sqrt(dot(r, r));
      report.iterations = j + 1;
      report.residual_history.push_back(r_norm);
      report.trace.push_back({rho, alpha, omega});
      if (r_norm < threshold) {
        stop(SolveStatus::converged);
        break;
      }

      const double rho_next = dot(r, r0);
      if (std::abs(omega) < config.breakdown_eps) {
        stop(SolveStatus::breakdown, "omega");
        break;
      }
      const double beta = (alpha / omega) * (rho_next / rho);
      {
        Stopwatch w(tm.blas1_ms);
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      }
      rho = rho_next;
    }
  }

  {
    Stopwatch w(tm.precond_ms);
    m.apply_right_inverse(y, x);
  }
  report.true_relative_residual = relative_residual(a, b, std::span<const double>(x), pool);
  return report;
}

DenseVector permute_rhs(const Permutation& perm, std::span<const double> v, int block_dim) {
  if (static_cast<index_t>(v.size()) != perm.size() * block_dim) throw DimensionError("permutation length mismatch");
  DenseVector out(v.size());
  for (index_t i = 0; i < perm.size(); ++i)
    for (int c = 0; c < block_dim; ++c) out[i * block_dim + c] = v[perm.new_to_old[i] * block_dim + c];
  return out;
}

DenseVector unpermute_solution(const Permutation& perm, std::span<const double> v, int block_dim) {
  if (static_cast<index_t>(v.size()) != perm.size() * block_dim) throw DimensionError("permutation length mismatch");
  DenseVector out(v.size());
  for (index_t i = 0; i < perm.size(); ++i)
    for (int c = 0; c < block_dim; ++c) out[perm.new_to_old[i] * block_dim + c] = v[i * block_dim + c];
  return out;
}

#define DDTRSV_INSTANTIATE(B)                                                                                      \
  template std::unique_ptr<Preconditioner> make_ilu0_preconditioner(                                               \
      const BlockSparseMatrix<B>&, const SubdomainLayout&, SolveStrategy, WorkerPool*, const TrisolveOptions&,     \
      const FactorOptions&);                                                                                       \
  template std::unique_ptr<Preconditioner> make_ildu0_fused_preconditioner(                                        \
      IlduFactors<B>, const SubdomainLayout&, Traversal, WorkerPool*, const TrisolveOptions&);                     \
  template std::unique_ptr<Preconditioner> make_ildu0_unfused_preconditioner(                                      \
      IlduFactors<B>, const SubdomainLayout&, Traversal, WorkerPool*, const TrisolveOptions&);                     \
  template double relative_residual(const BlockSparseMatrix<B>&, std::span<const double>, std::span<const double>, \
                                    WorkerPool*);                                                                  \
  template SolveReport bicgstab(const BlockSparseMatrix<B>&, std::span<const double>, std::span<double>,           \
                                const Preconditioner&, const BicgstabConfig&, WorkerPool*);

DDTRSV_INSTANTIATE(1)
DDTRSV_INSTANTIATE(3)

#undef DDTRSV_INSTANTIATE

}  // namespace ddtrsv
