#include <immintrin.h>

#include "ac/kernels.hpp"
#include "ac/potential.hpp"

namespace ac::kernels {
namespace {

void axpy(double* y, double a, const double* x, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_w(const double* x, const double* y, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(p, _mm256_loadu_pd(w + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i] * w[i];
  return s;
}

double sum_w(const double* x, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * w[i];
  return s;
}

// The quartic branch handles |u| <= 2; rare tail lanes fall back to scalar.
template <class ScalarFn>
inline void well_loop(const double* u, double* out, std::size_t n, ScalarFn f,
                      __m256d (*quartic)(__m256d)) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(u + i);
    __m256d a = _mm256_and_pd(v, absmask);
    if (_mm256_movemask_pd(_mm256_cmp_pd(a, two, _CMP_GT_OQ)) == 0) {
      _mm256_storeu_pd(out + i, quartic(v));
    } else {
      for (int k = 0; k < 4; ++k) out[i + k] = f(u[i + k]);
    }
  }
  for (; i < n; ++i) out[i] = f(u[i]);
}

__m256d w_quartic(__m256d v) {
  __m256d q = _mm256_fnmadd_pd(v, v, _mm256_set1_pd(1.0));  // 1 - v^2
  return _mm256_mul_pd(_mm256_set1_pd(0.25), _mm256_mul_pd(q, q));
}
__m256d dw_quartic(__m256d v) {
  __m256d q = _mm256_fmsub_pd(v, v, _mm256_set1_pd(1.0));  // v^2 - 1
  return _mm256_mul_pd(v, q);
}
__m256d d2w_quartic(__m256d v) {
  return _mm256_fmsub_pd(_mm256_set1_pd(3.0), _mm256_mul_pd(v, v), _mm256_set1_pd(1.0));
}

void w_batch(const double* u, double* out, std::size_t n) {
  well_loop(u, out, n, Potential::w, w_quartic);
}
void dw_batch(const double* u, double* out, std::size_t n) {
  well_loop(u, out, n, Potential::dw, dw_quartic);
}
void d2w_batch(const double* u, double* out, std::size_t n) {
  well_loop(u, out, n, Potential::d2w, d2w_quartic);
}

void lap_row(const double* um, const double* u0, const double* up, const double* ce,
             const double* cw, const double* cn, const double* cs, const double* inv,
             double uw, double ue, double* out, std::size_t n) {
  auto edge = [&](std::size_t i, double ul, double ur) {
    out[i] = inv[i] * (ce[i] * (ur - u0[i]) - cw[i] * (u0[i] - ul) +
                       cn[i] * (up[i] - u0[i]) - cs[i] * (u0[i] - um[i]));
  };
  if (n < 6) {
    for (std::size_t i = 0; i < n; ++i)
      edge(i, i == 0 ? uw : u0[i - 1], i + 1 == n ? ue : u0[i + 1]);
    return;
  }
  edge(0, uw, u0[1]);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d c = _mm256_loadu_pd(u0 + i);
    __m256d de = _mm256_sub_pd(_mm256_loadu_pd(u0 + i + 1), c);
    __m256d dwst = _mm256_sub_pd(c, _mm256_loadu_pd(u0 + i - 1));
    __m256d dn = _mm256_sub_pd(_mm256_loadu_pd(up + i), c);
    __m256d ds = _mm256_sub_pd(c, _mm256_loadu_pd(um + i));
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(ce + i), de);
    acc = _mm256_fnmadd_pd(_mm256_loadu_pd(cw + i), dwst, acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(cn + i), dn, acc);
    acc = _mm256_fnmadd_pd(_mm256_loadu_pd(cs + i), ds, acc);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(acc, _mm256_loadu_pd(inv + i)));
  }
  for (; i < n - 1; ++i) edge(i, u0[i - 1], u0[i + 1]);
  edge(n - 1, u0[n - 2], ue);
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops o{"avx2", axpy, dot_w, sum_w, w_batch, dw_batch, d2w_batch, lap_row};
  return o;
}

}  // namespace ac::kernels
