// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>

#include "dpst/kernels.hpp"

namespace dpst::kernels {

#if defined(DPST_HAVE_AVX2)
const KernelTable &avx2_table() noexcept;
#endif

const KernelTable *avx2_kernels() noexcept {
#if defined(DPST_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable *initial_table() noexcept {
  const char *env = std::getenv("DPST_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable *t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable *> &current() noexcept {
  static std::atomic<const KernelTable *> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable &active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) noexcept {
  if (name == "scalar") {
    current().store(&scalar_kernels());
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable *t = avx2_kernels()) {
      current().store(t);
      return true;
    }
  }
  return false;
}

}  // namespace dpst::kernels
