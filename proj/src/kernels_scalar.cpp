#include "ac/kernels.hpp"
#include "ac/potential.hpp"

namespace ac::kernels {
namespace {

void axpy(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_w(const double* x, const double* y, const double* w, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i] * w[i];
  return s;
}

double sum_w(const double* x, const double* w, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * w[i];
  return s;
}

void w_batch(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = Potential::w(u[i]);
}
void dw_batch(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = Potential::dw(u[i]);
}
void d2w_batch(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = Potential::d2w(u[i]);
}

void lap_row(const double* um, const double* u0, const double* up, const double* ce,
             const double* cw, const double* cn, const double* cs, const double* inv,
             double uw, double ue, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double ul = i == 0 ? uw : u0[i - 1];
    double ur = i + 1 == n ? ue : u0[i + 1];
    out[i] = inv[i] * (ce[i] * (ur - u0[i]) - cw[i] * (u0[i] - ul) +
                       cn[i] * (up[i] - u0[i]) - cs[i] * (u0[i] - um[i]));
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops o{"scalar", axpy, dot_w, sum_w, w_batch, dw_batch, d2w_batch, lap_row};
  return o;
}

}  // namespace ac::kernels
