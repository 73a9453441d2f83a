#include <cstdlib>
#include <string_view>

#include "dig/kernels.hpp"

namespace dig::kernels {
namespace {

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("DIG_KERNELS")) {
    if (std::string_view(forced) == "scalar") return scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dig::kernels
