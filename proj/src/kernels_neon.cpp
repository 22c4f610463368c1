#include <arm_neon.h>

#include "ac/kernels.hpp"
#include "ac/potential.hpp"

namespace ac::kernels {
namespace {

void axpy(double* y, double a, const double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_w(const double* x, const double* y, const double* w, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t p = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, p, vld1q_f64(w + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i] * w[i];
  return s;
}

double sum_w(const double* x, const double* w, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(w + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * w[i];
  return s;
}

// The quartic branch handles |u| <= 2; rare tail lanes fall back to scalar.
template <class ScalarFn, class QuarticFn>
inline void well_loop(const double* u, double* out, std::size_t n, ScalarFn f, QuarticFn q) {
  const float64x2_t two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(u + i);
    uint64x2_t over = vcgtq_f64(vabsq_f64(v), two);
    if (vmaxvq_u32(vreinterpretq_u32_u64(over)) == 0) {
      vst1q_f64(out + i, q(v));
    } else {
      out[i] = f(u[i]);
      out[i + 1] = f(u[i + 1]);
    }
  }
  for (; i < n; ++i) out[i] = f(u[i]);
}

float64x2_t w_quartic(float64x2_t v) {
  float64x2_t q = vfmsq_f64(vdupq_n_f64(1.0), v, v);  // 1 - v^2
  return vmulq_f64(vdupq_n_f64(0.25), vmulq_f64(q, q));
}
float64x2_t dw_quartic(float64x2_t v) {
  float64x2_t q = vsubq_f64(vmulq_f64(v, v), vdupq_n_f64(1.0));
  return vmulq_f64(v, q);
}
float64x2_t d2w_quartic(float64x2_t v) {
  return vfmaq_f64(vdupq_n_f64(-1.0), vdupq_n_f64(3.0), vmulq_f64(v, v));
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
  if (n < 4) {
    for (std::size_t i = 0; i < n; ++i)
      edge(i, i == 0 ? uw : u0[i - 1], i + 1 == n ? ue : u0[i + 1]);
    return;
  }
  edge(0, uw, u0[1]);
  std::size_t i = 1;
  for (; i + 2 <= n - 1; i += 2) {
    float64x2_t c = vld1q_f64(u0 + i);
    float64x2_t de = vsubq_f64(vld1q_f64(u0 + i + 1), c);
    float64x2_t dwst = vsubq_f64(c, vld1q_f64(u0 + i - 1));
    float64x2_t dn = vsubq_f64(vld1q_f64(up + i), c);
    float64x2_t ds = vsubq_f64(c, vld1q_f64(um + i));
    float64x2_t acc = vmulq_f64(vld1q_f64(ce + i), de);
    acc = vfmsq_f64(acc, vld1q_f64(cw + i), dwst);
    acc = vfmaq_f64(acc, vld1q_f64(cn + i), dn);
    acc = vfmsq_f64(acc, vld1q_f64(cs + i), ds);
    vst1q_f64(out + i, vmulq_f64(acc, vld1q_f64(inv + i)));
  }
  for (; i < n - 1; ++i) edge(i, u0[i - 1], u0[i + 1]);
  edge(n - 1, u0[n - 2], ue);
}

}  // namespace

const Ops& neon_ops() {
  static const Ops o{"neon", axpy, dot_w, sum_w, w_batch, dw_batch, d2w_batch, lap_row};
  return o;
}

}  // namespace ac::kernels
