#include <atomic>
#include <cstdlib>
#include <string>

#include "grf/kernels.hpp"

namespace grf::simd {

#if defined(GRF_BUILD_AVX2)
const KernelTable& avx2_kernel_table() noexcept;
#endif

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() noexcept {
#if defined(GRF_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* select_default() noexcept {
  if (const char* env = std::getenv("GRF_SIMD"); env != nullptr && std::string(env) == "scalar")
    return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::Scalar) {
    active().store(&scalar_kernels());
    return;
  }
  const KernelTable* t = avx2_kernels();
  if (t == nullptr) throw Error(Errc::InvalidArgument, "AVX2 kernels are not available on this machine");
  active().store(t);
}

}  // namespace grf::simd
