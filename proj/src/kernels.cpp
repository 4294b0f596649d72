#include "pdmatch/kernels.hpp"

namespace pdmatch::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const KernelOps& avx2_ops();  // kernels_avx2.cpp

static bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
#endif

#if defined(__aarch64__)
const KernelOps& neon_ops();  // kernels_neon.cpp
#endif

namespace {

const KernelOps& detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return avx2_ops();
#endif
#if defined(__aarch64__)
  return neon_ops();
#endif
  return scalar_ops();
}

const KernelOps*& selection() {
  static const KernelOps* current = &detect_best();
  return current;
}

}  // namespace

const KernelOps& active() { return *selection(); }

bool select(std::string_view name) {
  if (name == "auto") {
    selection() = &detect_best();
    return true;
  }
  if (name == "scalar") {
    selection() = &scalar_ops();
    return true;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2" && cpu_has_avx2()) {
    selection() = &avx2_ops();
    return true;
  }
#endif
#if defined(__aarch64__)
  if (name == "neon") {
    selection() = &neon_ops();
    return true;
  }
#endif
  return false;
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> names{"scalar"};
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) names.push_back("avx2");
#endif
#if defined(__aarch64__)
  names.push_back("neon");
#endif
  return names;
}

}  // namespace pdmatch::kernels
