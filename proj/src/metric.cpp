#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ac/metric.hpp"

namespace ac {

namespace {

double int_pow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

void finalize(Metric& m) {
  const Grid& g = m.grid;
  const int d = g.d;
  const std::size_t n = g.size;

  m.rho_min = *std::min_element(m.rho.begin(), m.rho.end());
  m.rho_max = *std::max_element(m.rho.begin(), m.rho.end());
  if (!(m.rho_min > 0.0) || !std::isfinite(m.rho_max))
    throw std::invalid_argument("metric: rho must be positive and finite");

  m.vol.resize(n);
  m.inv_rho_d.resize(n);
  m.inv_rho2.resize(n);
  const double cv = g.cell_volume();
  Field rd2(n);  // rho^{d-2}
  for (std::size_t i = 0; i < n; ++i) {
    const double r = m.rho[i];
    const double rd = int_pow(r, d);
    m.vol[i] = rd * cv;
    m.inv_rho_d[i] = 1.0 / rd;
    m.inv_rho2[i] = 1.0 / (r * r);
    rd2[i] = d == 2 ? 1.0 : (d == 1 ? 1.0 / r : r);
  }
  m.volume = 0.0;
  for (std::size_t i = 0; i < n; ++i) m.volume += m.vol[i];

  for (int a = 0; a < d; ++a) {
    m.fp[a].assign(n, 0.0);
    m.fm[a].assign(n, 0.0);
    const double inv_h2 = 1.0 / (g.h[a] * g.h[a]);
    const std::size_t sa = g.stride[a];
    const std::size_t na = static_cast<std::size_t>(g.dims[a]);
    const std::size_t span = sa * na;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      m.fp[a][i] = 0.5 * (rd2[i] + rd2[ip]) * inv_h2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      m.fm[a][ip] = m.fp[a][i];
    }
  }

  // Detect a profile metric rho = rho(last axis).
  const int ay = d - 1;
  const double tol = 1e-13 * m.rho_max;
  m.y_profile = true;
  for (std::size_t i = 0; i < n && m.y_profile; ++i) {
    const std::size_t y = (i / g.stride[ay]) % static_cast<std::size_t>(g.dims[ay]);
    if (std::fabs(m.rho[i] - m.rho[y * g.stride[ay]]) > tol) m.y_profile = false;
  }
}

}  // namespace

Metric Metric::flat(const Grid& g) {
  Metric m;
  m.grid = g;
  m.rho.assign(g.size, 1.0);
  m.family = Family::Flat;
  finalize(m);
  return m;
}

Metric Metric::neck(const Grid& g, double amplitude, double wavelength) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw std::invalid_argument("metric: neck amplitude must lie in [0,1)");
  if (!(wavelength > 0.0)) throw std::invalid_argument("metric: neck wavelength must be positive");
  const int ay = g.d - 1;
  const double periods = g.lengths[ay] / wavelength;
  if (std::fabs(periods - std::round(periods)) > 1e-9 * periods)
    throw std::invalid_argument("metric: neck wavelength must divide the domain height");

  Metric m;
  m.grid = g;
  m.family = Family::Neck;
  m.amplitude = amplitude;
  m.wavelength = wavelength;
  m.rho.resize(g.size);
  const double k = 2.0 * M_PI / wavelength;
  for (std::size_t i = 0; i < g.size; ++i) {
    const std::size_t y = (i / g.stride[ay]) % static_cast<std::size_t>(g.dims[ay]);
    m.rho[i] = 1.0 + amplitude * std::cos(k * g.h[ay] * static_cast<double>(y));
  }
  finalize(m);
  return m;
}

Metric Metric::from_rho(const Grid& g, Field rho_values) {
  check_shape(g, rho_values, "metric");
  Metric m;
  m.grid = g;
  m.family = Family::Custom;
  m.rho = std::move(rho_values);
  finalize(m);
  return m;
}

Metric Metric::from_table(const Grid& g, const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::invalid_argument("metric: cannot open table file " + csv_path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  for (char& c : text)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream vals(text);
  Field rho;
  rho.reserve(g.size);
  double v;
  while (vals >> v) rho.push_back(v);
  if (rho.size() != g.size)
    throw std::invalid_argument("metric: table has " + std::to_string(rho.size()) +
                                " values, grid needs " + std::to_string(g.size));
  return from_rho(g, std::move(rho));
}

double Metric::rho_at_y(double y) const {
  if (family == Family::Flat) return 1.0;
  if (family == Family::Neck)
    return 1.0 + amplitude * std::cos(2.0 * M_PI / wavelength * y);
  const int ay = height_axis();
  const int ny = grid.dims[ay];
  const double hy = grid.h[ay];
  double t = y / hy;
  double fl = std::floor(t);
  double frac = t - fl;
  long j0 = static_cast<long>(fl) % ny;
  if (j0 < 0) j0 += ny;
  const long j1 = (j0 + 1) % ny;
  const double r0 = rho[static_cast<std::size_t>(j0) * grid.stride[ay]];
  const double r1 = rho[static_cast<std::size_t>(j1) * grid.stride[ay]];
  return r0 + frac * (r1 - r0);
}

}  // namespace ac
