#include "dig/kernels.hpp"

namespace dig::kernels {
namespace {

void gemm_scalar(std::size_t n, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      const double* brow = b + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemv_scalar(std::size_t n, const double* a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * n;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += arow[k] * x[k];
    y[i] = acc;
  }
}

void axpy_scalar(std::size_t len, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", gemm_scalar, gemv_scalar, axpy_scalar};
  return table;
}

}  // namespace dig::kernels
