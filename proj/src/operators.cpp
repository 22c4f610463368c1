#include <cmath>

#include "ac/kernels.hpp"
#include "ac/operators.hpp"

namespace ac {

namespace {

void lap_1d(const Metric& m, const Field& u, Field& out) {
  const Grid& g = m.grid;
  const std::size_t n = g.size;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const std::size_t im = i > 0 ? i - 1 : n - 1;
    out[i] = m.inv_rho_d[i] *
             (m.fp[0][i] * (u[ip] - u[i]) - m.fm[0][i] * (u[i] - u[im]));
  }
}

void lap_2d(const Metric& m, const Field& u, Field& out) {
  const Grid& g = m.grid;
  const std::size_t nx = static_cast<std::size_t>(g.dims[0]);
  const int ny = g.dims[1];
  const auto& K = kernels::ops();
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = g.index(0, j);
    const std::size_t rm = g.index(0, j - 1);
    const std::size_t rp = g.index(0, j + 1);
    K.lap_row(&u[rm], &u[row], &u[rp], &m.fp[0][row], &m.fm[0][row], &m.fp[1][row],
              &m.fm[1][row], &m.inv_rho_d[row], u[row + nx - 1], u[row], &out[row], nx);
  }
}

void lap_3d(const Metric& m, const Field& u, Field& out) {
  const Grid& g = m.grid;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        double acc = m.fp[0][c] * (u[g.index(i + 1, j, k)] - u[c]) -
                     m.fm[0][c] * (u[c] - u[g.index(i - 1, j, k)]) +
                     m.fp[1][c] * (u[g.index(i, j + 1, k)] - u[c]) -
                     m.fm[1][c] * (u[c] - u[g.index(i, j - 1, k)]) +
                     m.fp[2][c] * (u[g.index(i, j, k + 1)] - u[c]) -
                     m.fm[2][c] * (u[c] - u[g.index(i, j, k - 1)]);
        out[c] = m.inv_rho_d[c] * acc;
      }
}

}  // namespace

void laplace_beltrami(const Metric& m, const Field& u, Field& out) {
  check_shape(m.grid, u, "laplace_beltrami");
  out.resize(m.grid.size);
  switch (m.grid.d) {
    case 1: lap_1d(m, u, out); break;
    case 2: lap_2d(m, u, out); break;
    default: lap_3d(m, u, out); break;
  }
}

double dirichlet_form(const Metric& m, const Field& u, const Field& v) {
  check_shape(m.grid, u, "dirichlet_form");
  check_shape(m.grid, v, "dirichlet_form");
  const Grid& g = m.grid;
  const double cv = g.cell_volume();
  double total = 0.0;
  for (int a = 0; a < g.d; ++a) {
    const std::size_t sa = g.stride[a];
    const std::size_t span = sa * static_cast<std::size_t>(g.dims[a]);
    const Field& f = m.fp[a];
    double s = 0.0;
    for (std::size_t i = 0; i < g.size; ++i) {
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      s += f[i] * ((u[ip] - u[i]) * (v[ip] - v[i]));
    }
    total += s;
  }
  return cv * total;
}

std::vector<Field> gradient_field(const Metric& m, const Field& u) {
  check_shape(m.grid, u, "gradient_field");
  const Grid& g = m.grid;
  std::vector<Field> comp(g.d, Field(g.size));
  for (int a = 0; a < g.d; ++a) {
    const std::size_t sa = g.stride[a];
    const std::size_t span = sa * static_cast<std::size_t>(g.dims[a]);
    const double inv2h = 0.5 / g.h[a];
    for (std::size_t i = 0; i < g.size; ++i) {
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      const std::size_t im = (i % span >= sa) ? i - sa : i - sa + span;
      comp[a][i] = inv2h * (u[ip] - u[im]) / m.rho[i];
    }
  }
  return comp;
}

Field grad_norm2(const Metric& m, const Field& u) {
  auto comp = gradient_field(m, u);
  Field out(m.grid.size, 0.0);
  for (const Field& c : comp)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  return out;
}

double integrate(const Metric& m, const Field& f) {
  check_shape(m.grid, f, "integrate");
  return kernels::ops().sum_w(f.data(), m.vol.data(), f.size());
}

double inner(const Metric& m, const Field& a, const Field& b) {
  check_shape(m.grid, a, "inner");
  check_shape(m.grid, b, "inner");
  return kernels::ops().dot_w(a.data(), b.data(), m.vol.data(), a.size());
}

double norm_l2(const Metric& m, const Field& a) { return std::sqrt(inner(m, a, a)); }

}  // namespace ac
