// Built with -mavx2 -mfma. Nothing in here may run before the dispatcher has
// confirmed CPU support.
#include <immintrin.h>

#include <algorithm>

#include "mobgen/numerics/simd.hpp"

namespace mobgen::simd::avx2 {
namespace {

constexpr std::size_t kColBlock = 256;
constexpr std::size_t kDepthBlock = 128;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// 4 rows x 8 columns micro-tile, depth range [p0, p1).
inline void tile_4x8(std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                     std::size_t i, std::size_t j, std::size_t p0, std::size_t p1) {
  __m256d c00 = _mm256_loadu_pd(c + (i + 0) * n + j);
  __m256d c01 = _mm256_loadu_pd(c + (i + 0) * n + j + 4);
  __m256d c10 = _mm256_loadu_pd(c + (i + 1) * n + j);
  __m256d c11 = _mm256_loadu_pd(c + (i + 1) * n + j + 4);
  __m256d c20 = _mm256_loadu_pd(c + (i + 2) * n + j);
  __m256d c21 = _mm256_loadu_pd(c + (i + 2) * n + j + 4);
  __m256d c30 = _mm256_loadu_pd(c + (i + 3) * n + j);
  __m256d c31 = _mm256_loadu_pd(c + (i + 3) * n + j + 4);
  for (std::size_t p = p0; p < p1; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
    const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
    __m256d av = _mm256_broadcast_sd(a + (i + 0) * k + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a + (i + 1) * k + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a + (i + 2) * k + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a + (i + 3) * k + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c + (i + 0) * n + j, c00);
  _mm256_storeu_pd(c + (i + 0) * n + j + 4, c01);
  _mm256_storeu_pd(c + (i + 1) * n + j, c10);
  _mm256_storeu_pd(c + (i + 1) * n + j + 4, c11);
  _mm256_storeu_pd(c + (i + 2) * n + j, c20);
  _mm256_storeu_pd(c + (i + 2) * n + j + 4, c21);
  _mm256_storeu_pd(c + (i + 3) * n + j, c30);
  _mm256_storeu_pd(c + (i + 3) * n + j + 4, c31);
}

// One row, columns [j0, j1), depth range [p0, p1).
inline void row_strip(std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                      std::size_t i, std::size_t j0, std::size_t j1, std::size_t p0,
                      std::size_t p1) {
  double* crow = c + i * n;
  std::size_t j = j0;
  for (; j + 4 <= j1; j += 4) {
    __m256d acc = _mm256_loadu_pd(crow + j);
    for (std::size_t p = p0; p < p1; ++p) {
      acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + i * k + p), _mm256_loadu_pd(b + p * n + j),
                            acc);
    }
    _mm256_storeu_pd(crow + j, acc);
  }
  for (; j < j1; ++j) {
    double acc = crow[j];
    for (std::size_t p = p0; p < p1; ++p) acc += a[i * k + p] * b[p * n + j];
    crow[j] = acc;
  }
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
          double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
    const std::size_t p1 = std::min(k, p0 + kDepthBlock);
    for (std::size_t j0 = 0; j0 < n; j0 += kColBlock) {
      const std::size_t j1 = std::min(n, j0 + kColBlock);
      const std::size_t j_vec_end = j0 + ((j1 - j0) / 8) * 8;
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        for (std::size_t j = j0; j < j_vec_end; j += 8) tile_4x8(n, k, a, b, c, i, j, p0, p1);
        if (j_vec_end < j1) {
          for (std::size_t r = 0; r < 4; ++r) row_strip(n, k, a, b, c, i + r, j_vec_end, j1, p0, p1);
        }
      }
      for (; i < m; ++i) row_strip(n, k, a, b, c, i, j0, j1, p0, p1);
    }
  }
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

constexpr KernelTable kTable{gemm, add, sub, mul, axpy, scale, dot, sum};

}  // namespace

const KernelTable* table() noexcept { return &kTable; }

}  // namespace mobgen::simd::avx2
