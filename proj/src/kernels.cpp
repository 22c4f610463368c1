#include <cstdlib>
#include <cstring>

#include "ac/kernels.hpp"

namespace ac::kernels {

namespace {

const Ops& select() {
  const char* env = std::getenv("AC_KERNELS");
  if (env) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
#if AC_HAVE_AVX2
    if (std::strcmp(env, "avx2") == 0) return avx2_ops();
#endif
#if AC_HAVE_NEON
    if (std::strcmp(env, "neon") == 0) return neon_ops();
#endif
    return scalar_ops();
  }
#if AC_HAVE_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops();
#endif
#if AC_HAVE_NEON
  return neon_ops();
#endif
  return scalar_ops();
}

}  // namespace

const Ops& ops() {
  static const Ops& chosen = select();
  return chosen;
}

}  // namespace ac::kernels
