#include "ac/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ac {

namespace {

Grid base_grid(const Grid& ambient) {
  if (ambient.d < 2)
    throw std::invalid_argument("hypersurface: ambient grid must have d >= 2");
  std::vector<int> ds(ambient.dims.begin(), ambient.dims.begin() + ambient.d - 1);
  std::vector<double> ls(ambient.lengths.begin(), ambient.lengths.begin() + ambient.d - 1);
  return Grid(ds, ls);
}

double simpson_cell(const Metric& m, std::size_t col, double a, double b) {
  const double mid = 0.5 * (a + b);
  return (b - a) / 6.0 * (rho_at(m, col, a) + 4.0 * rho_at(m, col, mid) + rho_at(m, col, b));
}

}  // namespace

Hypersurface make_surface(const Grid& ambient, double level, Field phi, double omega) {
  Hypersurface S;
  S.base = base_grid(ambient);
  S.ambient = ambient;
  S.level = level;
  if (phi.size() != S.base.size)
    throw std::invalid_argument("hypersurface: phi must live on the base lattice");
  if (!(omega > 0)) throw std::invalid_argument("hypersurface: omega must be positive");
  S.phi = std::move(phi);
  S.omega = omega;
  return S;
}

Hypersurface level_surface(const Grid& ambient, double level, double omega) {
  Grid b = base_grid(ambient);
  return make_surface(ambient, level, Field(b.size, 0.0), omega);
}

double rho_at(const Metric& m, std::size_t col, double y) {
  if (m.y_profile) return m.rho_at_y(y);
  const Grid& g = m.grid;
  const int va = g.d - 1;
  const double hy = g.h[va];
  const std::size_t bs = g.stride[va] == 0 ? 1 : g.stride[va];
  double t = y / hy;
  double j = std::floor(t);
  double w = t - j;
  int j0 = g.wrap(static_cast<int>(j), va);
  int j1 = g.wrap(static_cast<int>(j) + 1, va);
  return (1.0 - w) * m.rho[col + bs * static_cast<std::size_t>(j0)] +
         w * m.rho[col + bs * static_cast<std::size_t>(j1)];
}

VerticalTable vertical_table(const Metric& m) {
  if (!m.y_profile)
    throw std::invalid_argument("vertical_table: metric is not a vertical profile");
  const Grid& g = m.grid;
  const int va = g.d - 1;
  VerticalTable t;
  t.L = g.lengths[va];
  const int cells = g.dims[va] * 16;
  t.step = t.L / cells;
  t.F.assign(static_cast<std::size_t>(cells) + 1, 0.0);
  for (int k = 0; k < cells; ++k) {
    const double a = t.step * k, b = t.step * (k + 1), mid = 0.5 * (a + b);
    t.F[k + 1] = t.F[k] + (b - a) / 6.0 *
                              (m.rho_at_y(a) + 4.0 * m.rho_at_y(mid) + m.rho_at_y(b));
  }
  t.period = t.F.back();
  t.metric = &m;
  return t;
}

double VerticalTable::cumulative(double y) const {
  const double w = std::floor(y / L);
  const double r = y - w * L;
  std::size_t k = static_cast<std::size_t>(r / step);
  if (k >= F.size() - 1) k = F.size() - 2;
  const double a = step * static_cast<double>(k);
  const double mid = 0.5 * (a + r);
  const double tail = (r - a) / 6.0 *
                      (metric->rho_at_y(a) + 4.0 * metric->rho_at_y(mid) + metric->rho_at_y(r));
  return w * period + F[k] + tail;
}

double VerticalTable::length(double y0, double y1) const { return cumulative(y1) - cumulative(y0); }

double VerticalTable::invert(double y0, double s) const {
  const double target = cumulative(y0) + s;
  const double w = std::floor(target / period);
  const double t0 = target - w * period;
  std::size_t lo = 0, hi = F.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (F[mid] <= t0 ? lo : hi) = mid;
  }
  double y = step * static_cast<double>(lo) +
             (t0 - F[lo]) / std::max(metric->rho_at_y(step * lo), 1e-300);
  for (int it = 0; it < 4; ++it) {
    const double f = cumulative(w * L + y) - target;
    y -= f / std::max(metric->rho_at_y(y), 1e-300);
  }
  return w * L + y;
}

double vertical_length(const Metric& m, std::size_t col, double y0, double y1) {
  if (y1 < y0) return -vertical_length(m, col, y1, y0);
  const Grid& g = m.grid;
  const double hy = g.h[g.d - 1];
  double s = 0.0, a = y0;
  // Split at cell boundaries: the interpolated factor is piecewise smooth.
  double next = (std::floor(y0 / hy) + 1.0) * hy;
  while (next < y1) {
    s += m.y_profile ? simpson_cell(m, col, a, next)
                     : 0.5 * (next - a) * (rho_at(m, col, a) + rho_at(m, col, next));
    a = next;
    next += hy;
  }
  s += m.y_profile ? simpson_cell(m, col, a, y1)
                   : 0.5 * (y1 - a) * (rho_at(m, col, a) + rho_at(m, col, y1));
  return s;
}

double vertical_period(const Metric& m, std::size_t col) {
  return vertical_length(m, col, 0.0, m.grid.lengths[m.grid.d - 1]);
}

double vertical_height_to_coord(const Metric& m, std::size_t col, double level, double s) {
  double lo, hi;
  if (s >= 0) {
    lo = level;
    hi = level + s / m.rho_min;
  } else {
    lo = level + s / m.rho_min;
    hi = level;
  }
  const double tol = 1e-13 * (1.0 + std::fabs(s) + std::fabs(level));
  double y = level + s / rho_at(m, col, level);
  if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = vertical_length(m, col, level, y) - s;
    if (std::fabs(f) <= tol) return y;
    (f > 0 ? hi : lo) = y;
    const double step = f / rho_at(m, col, y);
    y -= step;
    if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
  }
  return y;
}

Hypersurface metric_graph(const Grid& ambient, const Metric& m, double level, const Field& s,
                          double omega) {
  Hypersurface S = level_surface(ambient, level, omega);
  if (s.size() != S.base.size)
    throw std::invalid_argument("metric_graph: height field must live on the base lattice");
  if (m.y_profile) {
    const VerticalTable t = vertical_table(m);
    for (std::size_t i = 0; i < s.size(); ++i) S.phi[i] = t.invert(level, s[i]) - level;
  } else {
    for (std::size_t i = 0; i < s.size(); ++i)
      S.phi[i] = vertical_height_to_coord(m, i, level, s[i]) - level;
  }
  return S;
}

namespace {

double masked_quadrature(const Hypersurface& S, const Metric& m,
                         const std::vector<std::uint8_t>* keep) {
  const Grid& b = S.base;
  const Grid& g = S.ambient;
  const int va = g.d - 1;
  const int n_pow = g.d - 1;
  std::vector<double> terms;
  terms.reserve(b.size);
  for (std::size_t i = 0; i < b.size; ++i) {
    if (!(std::fabs(S.phi[i]) < S.omega))
      throw std::invalid_argument("area: height exceeds the tubular bound omega");
    if (keep && !(*keep)[i]) continue;
    double slope2 = 0.0;
    for (int a = 0; a < b.d; ++a) {
      const std::size_t sa = b.stride[a];
      const std::size_t span = sa * static_cast<std::size_t>(b.dims[a]);
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      const std::size_t im = (i % span >= sa) ? i - sa : i - sa + span;
      const double dp = g.wrap_delta(S.phi[ip], S.phi[im], va) / (2.0 * b.h[a]);
      slope2 += dp * dp;
    }
    const double r = rho_at(m, i, S.level + S.phi[i]);
    terms.push_back((n_pow == 1 ? r : std::pow(r, n_pow)) * std::sqrt(1.0 + slope2));
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double v : terms) sum += v;
  return sum * b.cell_volume();
}

}  // namespace

double area(const Hypersurface& S, const Metric& m) { return masked_quadrature(S, m, nullptr); }

double area_masked(const Hypersurface& S, const Metric& m,
                   const std::vector<std::uint8_t>& keep) {
  if (keep.size() != S.base.size)
    throw std::invalid_argument("area_masked: mask must live on the base lattice");
  return masked_quadrature(S, m, &keep);
}

}  // namespace ac
