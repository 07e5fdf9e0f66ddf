#pragma once

#include <span>

#include "ddtrsv/common.hpp"

namespace ddtrsv {

class WorkerPool;

namespace vec {

/// Entries per partial sum in reductions. Partial sums are combined by a
/// pairwise tree, so the result does not depend on the worker count.
inline constexpr index_t reduction_chunk = 512;

double dot(std::span<const double> a, std::span<const double> b, WorkerPool* pool = nullptr);
double norm2(std::span<const double> a, WorkerPool* pool = nullptr);
double norm_inf(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y, WorkerPool* pool = nullptr);
/// z = x + alpha * y
void add_scaled(std::span<const double> x, double alpha, std::span<const double> y, std::span<double> z,
                WorkerPool* pool = nullptr);
void copy(std::span<const double> x, std::span<double> y);

}  // namespace vec
}  // namespace ddtrsv
