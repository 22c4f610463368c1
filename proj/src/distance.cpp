#include "ac/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

#include "ac/operators.hpp"

namespace ac {

namespace {

struct HeapEntry {
  double value;
  std::size_t node;
  bool operator>(const HeapEntry& o) const { return value > o.value; }
};

// Upwind quadratic solve: sum_a ((U - u_a)/h_a)^2 = rho^2 over the accepted
// axis values, dropping the largest while the update would undercut it.
double upwind_update(std::vector<std::pair<double, double>>& uh, double rho) {
  std::sort(uh.begin(), uh.end());
  while (!uh.empty()) {
    double alpha = 0.0, beta = 0.0, gamma = -rho * rho;
    for (const auto& [u, h] : uh) {
      const double w = 1.0 / (h * h);
      alpha += w;
      beta += u * w;
      gamma += u * u * w;
    }
    const double disc = beta * beta - alpha * gamma;
    if (disc >= 0.0) {
      const double cand = (beta + std::sqrt(disc)) / alpha;
      if (cand >= uh.back().first) return cand;
    }
    uh.pop_back();
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

SignedDistanceField signed_distance(const Hypersurface& S, const Metric& m) {
  const Grid& g = S.ambient;
  if (m.grid.size != g.size)
    throw std::invalid_argument("signed_distance: metric and surface grids disagree");
  const int va = g.d - 1;
  const double hy = g.h[va];
  const double Ly = g.lengths[va];
  const std::size_t bs = S.base.size;
  const int ny = g.dims[va];

  double pmin = S.phi[0], pmax = S.phi[0];
  for (double v : S.phi) {
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
  }
  if (std::max(std::fabs(pmin), std::fabs(pmax)) > 0.5 * Ly - 2.0 * hy)
    throw std::invalid_argument("signed_distance: graph too close to the vertical cut locus");

  SignedDistanceField out;
  out.dist.assign(g.size, 0.0);

  if (m.y_profile && pmax - pmin <= 1e-9 * (1.0 + std::fabs(pmax))) {
    const VerticalTable table = vertical_table(m);
    const double ystar = S.level + S.phi[0];
    const double P = table.period;
    for (int j = 0; j < ny; ++j) {
      const double delta = g.wrap_delta(g.coord(j, va), ystar, va);
      const double a = std::fabs(table.length(ystar, ystar + delta));
      const double row = (a <= P - a) ? std::copysign(a, delta) : -std::copysign(P - a, delta);
      for (std::size_t c = 0; c < bs; ++c) out.dist[c + bs * static_cast<std::size_t>(j)] = row;
    }
    out.band = 0.5 * P - 2.0 * m.rho_max * hy;
    out.exact_vertical = true;
    return out;
  }

  // Fast marching, unsigned first.
  constexpr std::uint8_t FAR = 0, KNOWN = 2;
  std::vector<std::uint8_t> state(g.size, FAR);
  Field& d = out.dist;
  d.assign(g.size, std::numeric_limits<double>::infinity());
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;

  double min_period = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < bs; ++c) {
    const double ystar = S.level + S.phi[c];
    const int j0 = static_cast<int>(std::floor(ystar / hy));
    const double y0 = hy * j0;
    const std::size_t below = c + bs * static_cast<std::size_t>(g.wrap(j0, va));
    const std::size_t above = c + bs * static_cast<std::size_t>(g.wrap(j0 + 1, va));
    const double d0 = vertical_length(m, c, y0, ystar);
    const double d1 = vertical_length(m, c, ystar, y0 + hy);
    if (d0 < d[below]) {
      d[below] = d0;
      heap.push({d0, below});
    }
    if (d1 < d[above]) {
      d[above] = d1;
      heap.push({d1, above});
    }
    if (c == 0 || !m.y_profile) min_period = std::min(min_period, vertical_period(m, c));
  }

  while (!heap.empty()) {
    const std::size_t node = heap.top().node;
    heap.pop();
    if (state[node] == KNOWN) continue;
    state[node] = KNOWN;
    for (int a = 0; a < g.d; ++a) {
      const std::size_t sa = g.stride[a];
      const std::size_t span = sa * static_cast<std::size_t>(g.dims[a]);
      for (int side = 0; side < 2; ++side) {
        const std::size_t nb = side ? ((node % span >= sa) ? node - sa : node - sa + span)
                                    : ((node % span + sa < span) ? node + sa : node + sa - span);
        if (state[nb] == KNOWN) continue;
        std::vector<std::pair<double, double>> uh;
        for (int ax = 0; ax < g.d; ++ax) {
          const std::size_t sx = g.stride[ax];
          const std::size_t spx = sx * static_cast<std::size_t>(g.dims[ax]);
          const std::size_t np = (nb % spx + sx < spx) ? nb + sx : nb + sx - spx;
          const std::size_t nm = (nb % spx >= sx) ? nb - sx : nb - sx + spx;
          double best = std::numeric_limits<double>::infinity();
          if (state[np] == KNOWN) best = d[np];
          if (state[nm] == KNOWN) best = std::min(best, d[nm]);
          if (best < std::numeric_limits<double>::infinity()) uh.push_back({best, g.h[ax]});
        }
        if (uh.empty()) continue;
        const double cand = upwind_update(uh, m.rho[nb]);
        if (cand < d[nb]) {
          d[nb] = cand;
          heap.push({cand, nb});
        }
      }
    }
  }

  for (std::size_t c = 0; c < bs; ++c) {
    const double ystar = S.level + S.phi[c];
    for (int j = 0; j < ny; ++j) {
      const std::size_t i = c + bs * static_cast<std::size_t>(j);
      if (g.wrap_delta(g.coord(j, va), ystar, va) < 0.0) d[i] = -d[i];
    }
  }
  out.band = 0.5 * min_period - 2.0 * m.rho_max * hy;
  return out;
}

double eikonal_residual(const Metric& m, const Field& dist, double band) {
  check_shape(m.grid, dist, "eikonal_residual");
  const Grid& g = m.grid;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size; ++i) {
    if (std::fabs(dist[i]) > band) continue;
    double n2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
      const std::size_t sa = g.stride[a];
      const std::size_t span = sa * static_cast<std::size_t>(g.dims[a]);
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      const std::size_t im = (i % span >= sa) ? i - sa : i - sa + span;
      const double dd = (dist[ip] - dist[im]) / (2.0 * g.h[a]);
      n2 += dd * dd;
    }
    worst = std::max(worst, std::fabs(std::sqrt(n2) / m.rho[i] - 1.0));
  }
  return worst;
}

std::vector<double> level_set_mean_curvature(const Metric& m, const Field& dist, double level) {
  check_shape(m.grid, dist, "level_set_mean_curvature");
  const Grid& g = m.grid;
  Field lap;
  laplace_beltrami(m, dist, lap);
  std::vector<double> samples;
  for (std::size_t i = 0; i < g.size; ++i) {
    const double v0 = dist[i] - level;
    if (v0 == 0.0) samples.push_back(-lap[i]);
    for (int a = 0; a < g.d; ++a) {
      const std::size_t sa = g.stride[a];
      const std::size_t span = sa * static_cast<std::size_t>(g.dims[a]);
      const std::size_t ip = (i % span + sa < span) ? i + sa : i + sa - span;
      const double v1 = dist[ip] - level;
      // A distance function satisfies |d(ip) - d(i)| <= rho_max h; edges that
      // jump further straddle the cut locus, not the level set.
      if (std::fabs(v0 - v1) > 2.0 * m.rho_max * g.h[a]) continue;
      if (v0 * v1 < 0.0) {
        const double theta = v0 / (v0 - v1);
        samples.push_back(-((1.0 - theta) * lap[i] + theta * lap[ip]));
      }
    }
  }
  if (samples.empty())
    throw std::invalid_argument("level_set_mean_curvature: empty level set");
  return samples;
}

}  // namespace ac
