#include "dig/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define DIG_HAVE_AVX2 1
#else
#define DIG_HAVE_AVX2 0
#endif

namespace dig::kernels {

#if DIG_HAVE_AVX2
namespace {

void gemm_avx2(std::size_t n, const double* a, const double* b, double* c) {
  const std::size_t vec_end = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * n;
    std::size_t j = 0;
    for (; j < vec_end; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < n; ++k) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(arow[k]), _mm256_loadu_pd(b + k * n + j), acc);
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += arow[k] * b[k * n + j];
      crow[j] = acc;
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemv_avx2(std::size_t n, const double* a, const double* x, double* y) {
  const std::size_t vec_end = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * n;
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k < vec_end; k += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + k), _mm256_loadu_pd(x + k), acc);
    }
    double tail = 0.0;
    for (; k < n; ++k) tail += arow[k] * x[k];
    y[i] = hsum(acc) + tail;
  }
}

void axpy_avx2(std::size_t len, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t vec_end = len & ~std::size_t{3};
  std::size_t i = 0;
  for (; i < vec_end; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < len; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable* avx2_table() noexcept {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{"avx2", gemm_avx2, gemv_avx2, axpy_avx2};
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() noexcept { return nullptr; }

#endif

}  // namespace dig::kernels
