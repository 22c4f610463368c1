#include "ac/double_cover.hpp"

#include <cmath>
#include <stdexcept>

namespace ac {

namespace {

// Index form over one sheet ring.
double ring_form(const Field& q, const Field& ell, double h, const double* f, std::size_t n) {
  double grad = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const double df = f[ip] - f[i];
    grad += df * df / (0.5 * (ell[i] + ell[ip]));
    pot += q[i] * f[i] * f[i] * ell[i];
  }
  return grad / h - pot * h;
}

}  // namespace

CoverSplit double_cover_splitting(const Hypersurface& S, const Metric& m, const Field& phi2,
                                  const std::vector<std::size_t>* involution) {
  Field q, ell;
  jacobi_assemble(S, m, q, ell);
  const std::size_t n = q.size();
  const std::size_t N = 2 * n;
  if (phi2.size() != N)
    throw std::invalid_argument("double_cover: test function must live on both sheets");

  std::vector<std::size_t> inv;
  if (involution) {
    inv = *involution;
    if (inv.size() != N)
      throw std::invalid_argument("double_cover: involution size mismatch");
    for (std::size_t i = 0; i < N; ++i) {
      if (inv[i] >= N || inv[inv[i]] != i)
        throw std::invalid_argument("double_cover: map is not an involution");
    }
    auto q2 = [&](std::size_t i) { return q[i % n]; };
    auto l2 = [&](std::size_t i) { return ell[i % n]; };
    auto ring_next = [&](std::size_t i) { return i < n ? (i + 1) % n : n + (i - n + 1) % n; };
    auto ring_prev = [&](std::size_t i) {
      return i < n ? (i + n - 1) % n : n + (i - n + n - 1) % n;
    };
    for (std::size_t i = 0; i < N; ++i) {
      if (std::fabs(q2(inv[i]) - q2(i)) > 1e-12 * (1.0 + std::fabs(q2(i))) ||
          std::fabs(l2(inv[i]) - l2(i)) > 1e-12 * (1.0 + std::fabs(l2(i))))
        throw std::invalid_argument("double_cover: involution is not an isometry");
      const std::size_t a = inv[ring_next(i)], b = inv[ring_prev(i)];
      const std::size_t p = ring_next(inv[i]), r = ring_prev(inv[i]);
      if (!((a == p && b == r) || (a == r && b == p)))
        throw std::invalid_argument("double_cover: involution breaks adjacency");
    }
  } else {
    inv.resize(N);
    for (std::size_t i = 0; i < N; ++i) inv[i] = i < n ? i + n : i - n;
  }

  CoverSplit out;
  out.phi_even.resize(N);
  out.phi_odd.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    out.phi_even[i] = 0.5 * (phi2[i] + phi2[inv[i]]);
    out.phi_odd[i] = 0.5 * (phi2[i] - phi2[inv[i]]);
  }
  const double h = S.base.h[0];
  auto form2 = [&](const Field& f) {
    return ring_form(q, ell, h, f.data(), n) + ring_form(q, ell, h, f.data() + n, n);
  };
  out.q_total = form2(phi2);
  out.q_even = form2(out.phi_even);
  out.q_odd = form2(out.phi_odd);
  return out;
}

}  // namespace ac
