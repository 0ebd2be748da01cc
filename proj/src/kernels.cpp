#include "voltwatch/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace voltwatch::kernels {

#if !defined(VOLTWATCH_HAVE_AVX2)
const KernelTable& avx2_table() {
  throw std::logic_error("avx2 kernel backend not compiled into this build");
}
#endif

bool avx2_supported() {
#if defined(VOLTWATCH_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* resolve(const std::string& name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") {
    if (!avx2_supported())
      throw std::invalid_argument(
          "kernel backend 'avx2' requested but not available on this machine");
    return &avx2_table();
  }
  if (name == "auto")
    return avx2_supported() ? &avx2_table() : &scalar_table();
  throw std::invalid_argument("unknown kernel backend '" + name +
                              "' (expected scalar, avx2, or auto)");
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = [] {
    const char* env = std::getenv("VOLTWATCH_KERNELS");
    return resolve(env != nullptr && *env != '\0' ? env : "auto");
  }();
  return slot;
}

}  // namespace

const KernelTable& active() { return *active_slot(); }

void select_backend(const std::string& name) { active_slot() = resolve(name); }

}  // namespace voltwatch::kernels
