#include <atomic>
#include <cstdlib>
#include <string_view>

#include "dcs/kernels/kernels.hpp"

#if defined(DCS_HAVE_AVX2_KERNELS)
namespace dcs::kernels::avx2 {
extern const KernelTable kTable;
}
#endif

namespace dcs::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DCS_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  const char* env = std::getenv("DCS_KERNELS");
  if (env && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(DCS_HAVE_AVX2_KERNELS)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2::kTable : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

bool force_variant(std::string_view name) {
  if (name == "scalar") {
    slot().store(&scalar_kernels());
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_kernels()) {
      slot().store(t);
      return true;
    }
  }
  return false;
}

}  // namespace dcs::kernels
