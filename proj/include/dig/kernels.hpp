#pragma once

// Dense inner-loop kernels for the small (n <= ~16) row-major matrices that
// every monodromy, exponential and integrator step is built from.
//
// Each kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2/FMA (x86-64) or NEON (AArch64) variant. The variant is
// chosen once at first use; set DIG_KERNELS=scalar in the environment to
// force the reference path.

#include <cstddef>
#include <string_view>

namespace dig::kernels {

/// c = a * b for row-major n x n matrices. `c` must not alias `a` or `b`.
using GemmFn = void (*)(std::size_t n, const double* a, const double* b, double* c);
/// y = a * x for a row-major n x n matrix. `y` must not alias `x`.
using GemvFn = void (*)(std::size_t n, const double* a, const double* x, double* y);
/// y += alpha * x over `len` entries.
using AxpyFn = void (*)(std::size_t len, double alpha, const double* x, double* y);

struct KernelTable {
  std::string_view name;
  GemmFn gemm;
  GemvFn gemv;
  AxpyFn axpy;
};

const KernelTable& scalar_table() noexcept;

/// AVX2/FMA table, or nullptr when the build target or the running CPU lacks it.
const KernelTable* avx2_table() noexcept;

/// NEON table, or nullptr off AArch64.
const KernelTable* neon_table() noexcept;

/// The table used by the library (selected once, thread-safe).
const KernelTable& active() noexcept;

inline void gemm(std::size_t n, const double* a, const double* b, double* c) {
  active().gemm(n, a, b, c);
}
inline void gemv(std::size_t n, const double* a, const double* x, double* y) {
  active().gemv(n, a, x, y);
}
inline void axpy(std::size_t len, double alpha, const double* x, double* y) {
  active().axpy(len, alpha, x, y);
}

}  // namespace dig::kernels
