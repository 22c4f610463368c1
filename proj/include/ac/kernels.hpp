#pragma once

#include <cstddef>

// Flat-array compute kernels behind the field operations. A scalar reference
// implementation always exists; SIMD variants (AVX2 on x86-64, NEON on
// aarch64) are selected once at startup from CPU capabilities. The env var
// AC_KERNELS=scalar|avx2|neon overrides the choice.
namespace ac::kernels {

struct Ops {
  const char* name;
  // y += a*x
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  // sum x[i]*y[i]*w[i]
  double (*dot_w)(const double* x, const double* y, const double* w, std::size_t n);
  // sum x[i]*w[i]
  double (*sum_w)(const double* x, const double* w, std::size_t n);
  // out[i] = W(u[i]) / W'(u[i]) / W''(u[i]) for the standard extended well
  void (*w_batch)(const double* u, double* out, std::size_t n);
  void (*dw_batch)(const double* u, double* out, std::size_t n);
  void (*d2w_batch)(const double* u, double* out, std::size_t n);
  // One row of the staggered-flux Laplacian:
  //   out[i] = inv[i] * ( ce[i]*(u0[e(i)]-u0[i]) - cw[i]*(u0[i]-u0[w(i)])
  //          + cn[i]*(up[i]-u0[i]) - cs[i]*(u0[i]-um[i]) )
  // where e/w are +-1 with periodic wrap handled by the caller for i=0,n-1
  // via the uw/ue scalars.
  void (*lap_row)(const double* um, const double* u0, const double* up,
                  const double* ce, const double* cw, const double* cn,
                  const double* cs, const double* inv, double uw, double ue,
                  double* out, std::size_t n);
};

const Ops& scalar_ops();
#if defined(AC_HAVE_AVX2)
const Ops& avx2_ops();
#endif
#if defined(AC_HAVE_NEON)
const Ops& neon_ops();
#endif

// Runtime-selected implementation (stable for the life of the process).
const Ops& ops();

}  // namespace ac::kernels
