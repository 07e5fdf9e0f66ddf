#include "ddtrsv/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv::vec {

namespace {

constexpr index_t chunks_per_task = 64;
constexpr index_t elementwise_chunk = 16384;

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("vector length mismatch");
}

double pairwise(std::vector<double>& partial) {
  if (partial.empty()) return 0.0;
  for (std::size_t width = 1; width < partial.size(); width *= 2)
    for (std::size_t i = 0; i + width < partial.size(); i += 2 * width) partial[i] += partial[i + width];
  return partial[0];
}

template <class Body>
void elementwise(index_t n, WorkerPool* pool, Body&& body) {
  const index_t tasks = (n + elementwise_chunk - 1) / elementwise_chunk;
  if (pool == nullptr || tasks <= 1) {
    body(0, n);
    return;
  }
  pool->parallel_for(tasks, [&](index_t c) { body(c * elementwise_chunk, std::min(n, (c + 1) * elementwise_chunk)); });
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b, WorkerPool* pool) {
  check_same_size(a.size(), b.size());
  const auto n = static_cast<index_t>(a.size());
  const index_t chunks = (n + reduction_chunk - 1) / reduction_chunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  auto run = [&](index_t group) {
    const index_t last_chunk = std::min(chunks, (group + 1) * chunks_per_task);
    for (index_t c = group * chunks_per_task; c < last_chunk; ++c) {
      double s = 0.0;
      for (index_t i = c * reduction_chunk; i < std::min(n, (c + 1) * reduction_chunk); ++i) s += a[i] * b[i];
      partial[c] = s;
    }
  };
  for_each_index(pool, (chunks + chunks_per_task - 1) / chunks_per_task, run);
  return pairwise(partial);
}

double norm2(std::span<const double> a, WorkerPool* pool) { return std::sqrt(dot(a, a, pool)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, WorkerPool* pool) {
  check_same_size(x.size(), y.size());
  elementwise(static_cast<index_t>(x.size()), pool, [&](index_t from, index_t to) {
    for (index_t i = from; i < to; ++i) y[i] += alpha * x[i];
  });
}

void add_scaled(std::span<const double> x, double alpha, std::span<const double> y, std::span<double> z,
                WorkerPool* pool) {
  check_same_size(x.size(), y.size());
  check_same_size(x.size(), z.size());
  elementwise(static_cast<index_t>(x.size()), pool, [&](index_t from, index_t to) {
    for (index_t i = from; i < to; ++i) z[i] = x[i] + alpha * y[i];
  });
}

void copy(std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  std::copy(x.begin(), x.end(), y.begin());
}

}  // namespace ddtrsv::vec
