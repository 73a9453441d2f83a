#include "dig/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>
#define DIG_HAVE_NEON 1
#else
#define DIG_HAVE_NEON 0
#endif

namespace dig::kernels {

#if DIG_HAVE_NEON
namespace {

void gemm_neon(std::size_t n, const double* a, const double* b, double* c) {
  const std::size_t vec_end = n & ~std::size_t{1};
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * n;
    std::size_t j = 0;
    for (; j < vec_end; j += 2) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t k = 0; k < n; ++k) {
        acc = vfmaq_f64(acc, vdupq_n_f64(arow[k]), vld1q_f64(b + k * n + j));
      }
      vst1q_f64(crow + j, acc);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += arow[k] * b[k * n + j];
      crow[j] = acc;
    }
  }
}

void gemv_neon(std::size_t n, const double* a, const double* x, double* y) {
  const std::size_t vec_end = n & ~std::size_t{1};
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * n;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k < vec_end; k += 2) acc = vfmaq_f64(acc, vld1q_f64(arow + k), vld1q_f64(x + k));
    double tail = 0.0;
    for (; k < n; ++k) tail += arow[k] * x[k];
    y[i] = vaddvq_f64(acc) + tail;
  }
}

void axpy_neon(std::size_t len, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const std::size_t vec_end = len & ~std::size_t{1};
  std::size_t i = 0;
  for (; i < vec_end; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < len; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable* neon_table() noexcept {
  static const KernelTable table{"neon", gemm_neon, gemv_neon, axpy_neon};
  return &table;
}

#else

const KernelTable* neon_table() noexcept { return nullptr; }

#endif

}  // namespace dig::kernels
