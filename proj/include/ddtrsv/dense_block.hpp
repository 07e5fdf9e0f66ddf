#pragma once

// Small dense kernels on row-major B x B blocks. B = 1 degenerates to
// scalar arithmetic, which lets the sparse kernels be written once.

#include <array>
#include <cmath>
#include <span>

namespace ddtrsv::block {

template <int B>
using Block = std::array<double, B * B>;

template <int B>
using ConstBlockSpan = std::span<const double, B * B>;

template <int B>
using BlockSpan = std::span<double, B * B>;

template <int B>
constexpr Block<B> identity() {
  Block<B> out{};
  for (int i = 0; i < B; ++i) out[i * B + i] = 1.0;
  return out;
}

template <int B>
double determinant(ConstBlockSpan<B> a) {
  static_assert(B == 1 || B == 3, "only 1x1 and 3x3 blocks are supported");
  if constexpr (B == 1) {
    return a[0];
  } else {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
}

/// Inverse by adjugate over determinant. Caller checks the determinant.
template <int B>
Block<B> inverse(ConstBlockSpan<B> a) {
  static_assert(B == 1 || B == 3, "only 1x1 and 3x3 blocks are supported");
  if constexpr (B == 1) {
    return {1.0 / a[0]};
  } else {
    const double inv_det = 1.0 / determinant<3>(a);
    Block<3> out;
    out[0] = (a[4] * a[8] - a[5] * a[7]) * inv_det;
    out[1] = (a[2] * a[7] - a[1] * a[8]) * inv_det;
    out[2] = (a[1] * a[5] - a[2] * a[4]) * inv_det;
    out[3] = (a[5] * a[6] - a[3] * a[8]) * inv_det;
    out[4] = (a[0] * a[8] - a[2] * a[6]) * inv_det;
    out[5] = (a[2] * a[3] - a[0] * a[5]) * inv_det;
    out[6] = (a[3] * a[7] - a[4] * a[6]) * inv_det;
    out[7] = (a[1] * a[6] - a[0] * a[7]) * inv_det;
    out[8] = (a[0] * a[4] - a[1] * a[3]) * inv_det;
    return out;
  }
}

/// out = a * b
template <int B>
Block<B> multiply(ConstBlockSpan<B> a, ConstBlockSpan<B> b) {
  Block<B> out{};
  for (int i = 0; i < B; ++i)
    for (int k = 0; k < B; ++k) {
      const double aik = a[i * B + k];
      for (int j = 0; j < B; ++j) out[i * B + j] += aik * b[k * B + j];
    }
  return out;
}

/// c -= a * b
template <int B>
void multiply_subtract(ConstBlockSpan<B> a, ConstBlockSpan<B> b, BlockSpan<B> c) {
  for (int i = 0; i < B; ++i)
    for (int k = 0; k < B; ++k) {
      const double aik = a[i * B + k];
      for (int j = 0; j < B; ++j) c[i * B + j] -= aik * b[k * B + j];
    }
}

/// y -= a * x, accumulating each component left to right over columns.
template <int B>
inline void gemv_subtract(ConstBlockSpan<B> a, const double* x, double* y) {
  for (int r = 0; r < B; ++r) {
    double acc = y[r];
    for (int c = 0; c < B; ++c) acc -= a[r * B + c] * x[c];
    y[r] = acc;
  }
}

/// y = a * x (y must not alias x)
template <int B>
inline void gemv(ConstBlockSpan<B> a, const double* x, double* y) {
  for (int r = 0; r < B; ++r) {
    double acc = 0.0;
    for (int c = 0; c < B; ++c) acc += a[r * B + c] * x[c];
    y[r] = acc;
  }
}

template <int B>
double max_abs(ConstBlockSpan<B> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace ddtrsv::block
