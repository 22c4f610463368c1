#include "ac/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ac {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Raised-cosine plateau: 1 on r <= r1, 0 beyond r2, C^1 in between.
double taper_shape(double r, double r1, double r2) {
  if (r <= r1) return 1.0;
  if (r >= r2) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (r - r1) / (r2 - r1)));
}

double ring_distance(double a, double b, double period) {
  double d = std::fmod(std::fabs(a - b), period);
  return std::min(d, period - d);
}

// Node arclength positions from the length density, trapezoid prefix.
std::vector<double> node_arcs(const Field& ell, double h, double* period) {
  const std::size_t n = ell.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + 0.5 * (ell[i - 1] + ell[i]) * h;
  *period = arc[n - 1] + 0.5 * (ell[n - 1] + ell[0]) * h;
  return arc;
}

Field capacity_field(const JacobiData& jd, const std::vector<double>& arc, double period,
                     double center_arc, double R0) {
  const double r1 = 1.1 * R0;
  const double r2 = 0.5 * period;
  Field f(jd.eta.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = ring_distance(arc[i], center_arc, period);
    f[i] = jd.eta[i] * (1.0 - taper_shape(r, r1, r2));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Search context: section, test function, hole masks, reference areas.

struct CalContext {
  const Hypersurface* S = nullptr;
  const Metric* m = nullptr;
  const JacobiData* jd = nullptr;
  Field phi_tilde;
  double phimax = 0.0;
  std::vector<std::uint8_t> keep_out;
  std::vector<std::uint8_t> keep_in;
  double clear = 0.0;  // graph height bound, coordinate units
  double omega = 0.0;  // vertical tubular semi-width, metric units
  double area_M = 0.0;
  double area_B = 0.0;
};

double tube_semiwidth(const Hypersurface& S, const Metric& m) {
  if (m.y_profile) return 0.5 * vertical_period(m, 0);
  double w = kInf;
  for (std::size_t i = 0; i < S.base.size; ++i) w = std::min(w, 0.5 * vertical_period(m, i));
  return w;
}

CalContext make_context(const Hypersurface& S, const Metric& m, const JacobiData& jd,
                        const Field& phi_tilde, double center_arc, double R) {
  CalContext cx;
  cx.S = &S;
  cx.m = &m;
  cx.jd = &jd;
  cx.phi_tilde = phi_tilde;
  for (double v : phi_tilde) cx.phimax = std::max(cx.phimax, v);
  double period = 0.0;
  const std::vector<double> arc = node_arcs(jd.ell, jd.h, &period);
  const std::size_t n = S.base.size;
  cx.keep_out.assign(n, 0);
  cx.keep_in.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool in = ring_distance(arc[i], center_arc, period) <= R;
    cx.keep_in[i] = in ? 1 : 0;
    cx.keep_out[i] = in ? 0 : 1;
  }
  cx.clear = 0.5 * S.ambient.lengths[S.ambient.d - 1];
  cx.omega = tube_semiwidth(S, m);
  cx.area_M = area(S, m);
  cx.area_B = area_masked(S, m, cx.keep_in);
  return cx;
}

Field slide_field(const CalContext& cx, double c, double t) {
  Field s(cx.phi_tilde.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = c + t * cx.phi_tilde[i];
  return s;
}

Hypersurface sheet_graph(const CalContext& cx, const Field& s, double sign) {
  Field t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = sign * s[i];
  return metric_graph(cx.S->ambient, *cx.m, cx.S->level, t, cx.clear);
}

double both_area(const CalContext& cx, const Field& s) {
  return area(sheet_graph(cx, s, 1.0), *cx.m) + area(sheet_graph(cx, s, -1.0), *cx.m);
}

double both_excised(const CalContext& cx, const Field& s) {
  return area_masked(sheet_graph(cx, s, 1.0), *cx.m, cx.keep_out) +
         area_masked(sheet_graph(cx, s, -1.0), *cx.m, cx.keep_out);
}

// Min slack of the excised-area and full-slide bounds over the (c, t) family
// pushed out as far as c. Leaves negative values when a bound fails.
void family_margins(const CalContext& cx, double c, double t0, double tau, int nc, int nt,
                    double* hole, double* slide) {
  const double hole_rhs = 2.0 * (cx.area_M - 0.75 * cx.area_B);
  const double slide_rhs = 2.0 * cx.area_M - tau;
  double mh = kInf, ms = kInf;
  for (int ci = 0; ci < nc; ++ci) {
    const double cs = nc > 1 ? c * ci / (nc - 1) : c;
    if (cs + t0 * cx.phimax > 0.98 * cx.omega) {
      *hole = *slide = -1.0;
      return;
    }
    for (int tj = 0; tj < nt; ++tj) {
      const double ts = nt > 1 ? t0 * tj / (nt - 1) : t0;
      mh = std::min(mh, hole_rhs - both_excised(cx, slide_field(cx, cs, ts)));
    }
    ms = std::min(ms, slide_rhs - both_area(cx, slide_field(cx, cs, t0)));
  }
  *hole = mh;
  *slide = ms;
}

// Worst slack of H >= (t/2) lambda eta_min over the tube family t eta, t <= z,
// with H taken with respect to the normal pointing away from the section.
double tube_margin(const CalContext& cx, double z, int nt) {
  double worst = kInf;
  const double lam = cx.jd->lambda;
  const double emin = cx.jd->eta_min;
  const std::size_t n = cx.phi_tilde.size();
  for (int k = 1; k <= nt; ++k) {
    const double t = z * k / nt;
    Field s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = t * cx.jd->eta[i];
    for (double sign : {1.0, -1.0}) {
      const Hypersurface g = sheet_graph(cx, s, sign);
      const SignedDistanceField sd = signed_distance(g, *cx.m);
      for (double v : level_set_mean_curvature(*cx.m, sd.dist, 0.0)) {
        const double away = sign > 0.0 ? v : -v;
        worst = std::min(worst, away - 0.5 * t * lam * emin);
      }
    }
  }
  return worst;
}

double identity_error(const CalContext& cx) {
  const Field zero(cx.phi_tilde.size(), 0.0);
  const double lhs = both_excised(cx, zero);
  const double rhs = 2.0 * (cx.area_M - cx.area_B);
  return std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs));
}

double family_kappa(const CalContext& cx, double c0, double t0, int nc, int nt) {
  double kmax = 0.0;
  Field q, ell, kap;
  for (int ci = 0; ci < nc; ++ci) {
    const double cs = nc > 1 ? c0 * ci / (nc - 1) : c0;
    for (int tj = 0; tj < nt; ++tj) {
      const double ts = nt > 1 ? t0 * tj / (nt - 1) : t0;
      const Field s = slide_field(cx, cs, ts);
      for (double sign : {1.0, -1.0}) {
        const Hypersurface g = sheet_graph(cx, s, sign);
        jacobi_assemble(g, *cx.m, q, ell, &kap);
        for (double v : kap) kmax = std::max(kmax, std::fabs(v));
      }
    }
  }
  return kmax;
}

[[noreturn]] void fail(const std::string& what, double margin) {
  std::ostringstream os;
  os << what << " (margin " << margin << ")";
  throw std::runtime_error(os.str());
}

void push_line(CalibrationReport* rep, const std::string& name, double margin) {
  rep->lines.push_back({name, margin});
}

// ---------------------------------------------------------------------------
// Doubled-resolution re-derivation. The selected constants are frozen; only
// the measured quantities and the inequality slacks are recomputed.

Metric refine_metric(const Metric& m, const Grid& g2) {
  switch (m.family) {
    case Metric::Family::Flat:
      return Metric::flat(g2);
    case Metric::Family::Neck:
      return Metric::neck(g2, m.amplitude, m.wavelength);
    case Metric::Family::Custom:
      break;
  }
  const Grid& g = m.grid;
  Field rho2(g2.size);
  for (int j = 0; j < g2.dims[1]; ++j) {
    for (int i = 0; i < g2.dims[0]; ++i) {
      const double x = g2.coord(i, 0) / g.h[0];
      const double y = g2.coord(j, 1) / g.h[1];
      const int i0 = static_cast<int>(std::floor(x));
      const int j0 = static_cast<int>(std::floor(y));
      const double fx = x - i0;
      const double fy = y - j0;
      const double v00 = m.rho[g.index(i0, j0)];
      const double v10 = m.rho[g.index(i0 + 1, j0)];
      const double v01 = m.rho[g.index(i0, j0 + 1)];
      const double v11 = m.rho[g.index(i0 + 1, j0 + 1)];
      rho2[g2.index(i, j)] = (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) +
                             fx * ((1.0 - fy) * v10 + fy * v11);
    }
  }
  return Metric::from_rho(g2, std::move(rho2));
}

double rel_drift(double fine, double coarse) {
  return std::fabs(fine - coarse) / std::max(1e-12, std::fabs(coarse));
}

double refine_check(const CalContext& cx, const UnstableRegion& ur, const CalibratedConstants& cc,
                    CalibrationReport* rep) {
  const Grid& g = cx.S->ambient;
  Grid g2(std::vector<int>{2 * g.dims[0], 2 * g.dims[1]},
          std::vector<double>{g.lengths[0], g.lengths[1]});
  const Metric m2 = refine_metric(*cx.m, g2);

  const std::size_t n = cx.S->base.size;
  Field phi2(2 * n);
  const int va = g.d - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    phi2[2 * i] = cx.S->phi[i];
    phi2[2 * i + 1] = cx.S->phi[i] + 0.5 * g.wrap_delta(cx.S->phi[ip], cx.S->phi[i], va);
  }
  const Hypersurface S2 = make_surface(g2, cx.S->level, std::move(phi2), cx.S->omega);
  const JacobiData jd2 = jacobi_first_eigenpair(S2, m2);

  double period2 = 0.0;
  const std::vector<double> arc2 = node_arcs(jd2.ell, jd2.h, &period2);
  const Field phit2 = capacity_field(jd2, arc2, period2, ur.center_arc, ur.R0);
  const double Q2 = jacobi_quadratic_form(jd2, phit2);
  if (!(Q2 < 0.0)) fail("calibration refine: index form lost negativity", -Q2);

  const CalContext c2 = make_context(S2, m2, jd2, phit2, ur.center_arc, ur.R);
  const double tau2 = 0.5 * (both_area(c2, slide_field(c2, 0.0, 0.0)) -
                             both_area(c2, slide_field(c2, 0.0, cc.t0)));
  const double ka2 = family_kappa(c2, cc.c0, cc.t0, 9, 5);

  double hole2 = 0.0, slide2 = 0.0;
  family_margins(c2, cc.c0, cc.t0, tau2, 33, 5, &hole2, &slide2);
  if (!(hole2 > 0.0)) fail("calibration refine: excised-area bound failed", hole2);
  if (!(slide2 > 0.0)) fail("calibration refine: full-slide bound failed", slide2);
  const double tube2 = tube_margin(c2, cc.z0, 32);
  if (!(tube2 > 0.0)) fail("calibration refine: tube mean-convexity failed", tube2);
  const double id2 = identity_error(c2);
  if (!(id2 <= 1e-12)) fail("calibration refine: excised-area identity failed", 1e-12 - id2);

  struct Item {
    const char* name;
    double drift;
  };
  const Item items[] = {{"lambda", rel_drift(jd2.lambda, cx.jd->lambda)},
                        {"area", rel_drift(c2.area_M, cx.area_M)},
                        {"tau", rel_drift(tau2, cc.tau)},
                        {"kappa", rel_drift(ka2, cc.K_A)},
                        {"index-form", rel_drift(Q2, ur.Q)}};
  double worst = 0.0;
  for (const Item& it : items) {
    worst = std::max(worst, it.drift);
    if (!(it.drift <= 0.02))
      fail(std::string("calibration refine: ") + it.name + " drifted beyond 2%", 0.02 - it.drift);
  }
  push_line(rep, "refine-drift", 0.02 - worst);
  push_line(rep, "refine-hole-area", hole2);
  push_line(rep, "refine-slide-area", slide2);
  push_line(rep, "refine-tube-mean-convex", tube2);
  return worst;
}

// ---------------------------------------------------------------------------
// Alternate evaluators sharing no code with the search: midpoint quadrature on
// the piecewise linear graph, a fresh column arclength table, a dense
// eigensolver, and the curvature route to the tube bound.

struct AltColumn {
  const Metric* m = nullptr;
  std::size_t col = 0;
  double level = 0.0;
  double span = 0.0;  // vertical coordinate period
  double step = 0.0;
  double turn = 0.0;  // metric length of the full vertical circle
  std::vector<double> prefix;

  void build(const Metric& mm, std::size_t c, double lv, int panels) {
    m = &mm;
    col = c;
    level = lv;
    span = mm.grid.lengths[mm.grid.d - 1];
    step = span / panels;
    prefix.assign(panels + 1, 0.0);
    for (int k = 0; k < panels; ++k) {
      const double a = level + k * step;
      const double s = rho_at(mm, col, a) + 4.0 * rho_at(mm, col, a + 0.5 * step) +
                       rho_at(mm, col, a + step);
      prefix[k + 1] = prefix[k] + s * step / 6.0;
    }
    turn = prefix.back();
  }

  // Signed metric length from the level line to vertical coordinate y.
  double cum(double y) const {
    const double w = y - level;
    const double k = std::floor(w / span);
    const double r = w - k * span;
    const int j = std::min(static_cast<int>(r / step), static_cast<int>(prefix.size()) - 2);
    const double a = level + j * step;
    const double width = r - j * step;
    const double part = width <= 0.0
                            ? 0.0
                            : width / 6.0 *
                                  (rho_at(*m, col, a) + 4.0 * rho_at(*m, col, a + 0.5 * width) +
                                   rho_at(*m, col, a + width));
    return k * turn + prefix[j] + part;
  }

  // Inverse of cum: vertical coordinate at signed metric height s.
  double invert(double s) const {
    // rho_max shrinks |y| and rho_min stretches it, so order the ends by sign.
    const double a = level + s / m->rho_max;
    const double b = level + s / m->rho_min;
    double lo = std::min(a, b) - step;
    double hi = std::max(a, b) + step;
    for (int it = 0; it < 90; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cum(mid) < s ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) y -= (cum(y) - s) / rho_at(*m, col, y);
    return y;
  }
};

double alt_area(const Grid& ambient, double level, const Field& phi, const Metric& m,
                const std::vector<std::uint8_t>* keep) {
  const int va = ambient.d - 1;
  const std::size_t n = phi.size();
  const double h = ambient.h[0];
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const double dphi = ambient.wrap_delta(phi[ip], phi[i], va);
    const double root = std::sqrt(1.0 + dphi * dphi / (h * h));
    for (int s = 0; s < 4; ++s) {
      const double w = (s + 0.5) / 4.0;
      if (keep && !((w < 0.5) ? (*keep)[i] : (*keep)[ip])) continue;
      const double y = level + phi[i] + w * dphi;
      const double rho = (1.0 - w) * rho_at(m, i, y) + w * rho_at(m, ip, y);
      sum += rho * root * (h / 4.0);
    }
  }
  return sum;
}

Field alt_graph_phi(const std::vector<AltColumn>& cols, const Field& s, double sign) {
  Field phi(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    phi[i] = cols[i].invert(sign * s[i]) - cols[i].level;
  return phi;
}

// Largest eigenvalue of the stability operator by a dense cyclic Jacobi sweep
// on the similarity-symmetrized section matrix.
double dense_lambda(const JacobiData& jd) {
  const int n = static_cast<int>(jd.q.size());
  const double h = jd.h;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n;
    const int im = (i + n - 1) % n;
    const double cp = 2.0 / (jd.ell[i] + jd.ell[ip]);
    const double cm = 2.0 / (jd.ell[i] + jd.ell[im]);
    at(i, i) = (cp + cm) / (jd.ell[i] * h * h) - jd.q[i];
    at(i, ip) = -cp / (h * h * std::sqrt(jd.ell[i] * jd.ell[ip]));
    at(i, im) = -cm / (h * h * std::sqrt(jd.ell[i] * jd.ell[im]));
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, norm = 0.0;
    for (int p = 0; p < n; ++p) {
      norm += at(p, p) * at(p, p);
      for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    }
    if (off <= 1e-28 * std::max(1.0, norm)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double mu = kInf;
  for (int i = 0; i < n; ++i) mu = std::min(mu, at(i, i));
  return -mu;
}

double alt_verify(const CalContext& cx, const CalibratedConstants& cc, CalibrationReport* rep) {
  const Grid& g = cx.S->ambient;
  const std::size_t n = cx.S->base.size;
  std::vector<AltColumn> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i].build(*cx.m, i, cx.S->level, 4096);

  auto alt_both = [&](const Field& s) {
    return alt_area(g, cx.S->level, alt_graph_phi(cols, s, 1.0), *cx.m, nullptr) +
           alt_area(g, cx.S->level, alt_graph_phi(cols, s, -1.0), *cx.m, nullptr);
  };
  auto alt_excised = [&](const Field& s) {
    return alt_area(g, cx.S->level, alt_graph_phi(cols, s, 1.0), *cx.m, &cx.keep_out) +
           alt_area(g, cx.S->level, alt_graph_phi(cols, s, -1.0), *cx.m, &cx.keep_out);
  };

  const double area_alt = alt_area(g, cx.S->level, cx.S->phi, *cx.m, nullptr);
  const double area_rel = rel_drift(area_alt, cx.area_M);
  if (!(area_rel <= 5e-3)) fail("calibration verify: alternate area disagrees", 5e-3 - area_rel);

  const double tau_alt =
      0.5 * (alt_both(slide_field(cx, 0.0, 0.0)) - alt_both(slide_field(cx, 0.0, cc.t0)));
  const double tau_rel = rel_drift(tau_alt, cc.tau);
  if (!(tau_rel <= 0.02)) fail("calibration verify: alternate tau disagrees", 0.02 - tau_rel);

  // Strict area decrease along the slide, fresh sample count.
  double drop = kInf, prev = alt_both(slide_field(cx, 0.0, 0.0));
  for (int k = 1; k <= 97; ++k) {
    const double cur = alt_both(slide_field(cx, 0.0, cc.t0 * k / 97.0));
    drop = std::min(drop, prev - cur);
    prev = cur;
  }
  if (!(drop > 0.0)) fail("calibration verify: slide is not strictly decreasing", drop);

  const double area_B_alt = alt_area(g, cx.S->level, cx.S->phi, *cx.m, &cx.keep_in);
  const double hole_rhs = 2.0 * (area_alt - 0.75 * area_B_alt);
  const double slide_rhs = 2.0 * area_alt - tau_alt;
  double hole_m = kInf, slide_m = kInf;
  for (int ci = 0; ci < 29; ++ci) {
    const double cs = cc.c0 * ci / 28.0;
    for (int tj = 0; tj < 3; ++tj)
      hole_m = std::min(hole_m, hole_rhs - alt_excised(slide_field(cx, cs, cc.t0 * tj / 2.0)));
  }
  for (int ci = 0; ci < 47; ++ci) {
    const double cs = cc.c0 * ci / 46.0;
    slide_m = std::min(slide_m, slide_rhs - alt_both(slide_field(cx, cs, cc.t0)));
  }
  if (!(hole_m > 0.0)) fail("calibration verify: alternate excised-area bound failed", hole_m);
  if (!(slide_m > 0.0)) fail("calibration verify: alternate full-slide bound failed", slide_m);

  // Curvature route to the tube bound: H away from the section is -kappa on
  // the upper sheet and +kappa on the lower one.
  double tube_m = kInf;
  Field q, ell, kap;
  for (int k = 1; k <= 41; ++k) {
    const double t = cc.z0 * k / 41.0;
    Field s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = t * cx.jd->eta[i];
    for (double sign : {1.0, -1.0}) {
      const Hypersurface sheet =
          make_surface(g, cx.S->level, alt_graph_phi(cols, s, sign), cx.clear);
      jacobi_assemble(sheet, *cx.m, q, ell, &kap);
      for (double v : kap) {
        const double away = sign > 0.0 ? -v : v;
        tube_m = std::min(tube_m, away - 0.5 * t * cx.jd->lambda * cx.jd->eta_min);
      }
    }
  }
  if (!(tube_m > 0.0)) fail("calibration verify: curvature route lost mean-convexity", tube_m);

  const double lam_dense = dense_lambda(*cx.jd);
  const double lam_diff = std::fabs(lam_dense - cx.jd->lambda);
  const double lam_tol = 1e-8 * (1.0 + std::fabs(cx.jd->lambda));
  if (!(lam_diff <= lam_tol))
    fail("calibration verify: dense eigenvalue disagrees", lam_tol - lam_diff);

  push_line(rep, "alt-area-agreement", 5e-3 - area_rel);
  push_line(rep, "alt-tau-agreement", 0.02 - tau_rel);
  push_line(rep, "alt-slide-monotone", drop);
  push_line(rep, "alt-hole-area", hole_m);
  push_line(rep, "alt-slide-area", slide_m);
  push_line(rep, "alt-tube-mean-convex", tube_m);
  push_line(rep, "alt-lambda-agreement", lam_tol - lam_diff);
  return std::max(area_rel, std::max(tau_rel, lam_diff / lam_tol));
}

// ---------------------------------------------------------------------------
// Admissibility internals: the tube distance fields do not depend on eps.

struct TubeDistances {
  SignedDistanceField up;
  SignedDistanceField dn;
};

TubeDistances tube_distances(const Hypersurface& S, const Metric& m, const JacobiData& jd,
                             double z0) {
  const double clear = 0.5 * S.ambient.lengths[S.ambient.d - 1];
  const std::size_t n = S.base.size;
  Field up(n), dn(n);
  for (std::size_t i = 0; i < n; ++i) {
    up[i] = z0 * jd.eta[i];
    dn[i] = -z0 * jd.eta[i];
  }
  TubeDistances td;
  td.up = signed_distance(metric_graph(S.ambient, m, S.level, up, clear), m);
  td.dn = signed_distance(metric_graph(S.ambient, m, S.level, dn, clear), m);
  return td;
}

Admissibility admissibility_impl(const Metric& m, const CalibratedConstants& cc,
                                 const TubeDistances& td, Epsilon eps) {
  Admissibility ad;
  ad.eps = eps.value;
  const double r = 2.0 * eps.support_radius();
  ad.margin[0] = cc.c0 / 20.0 - r;
  ad.margin[1] = cc.z0 * cc.eta_min - r;
  ad.margin[2] = (cc.c0 - cc.z0 * cc.eta_max) - 2.0 * r;

  const double hbound = 0.25 * cc.z0 * cc.lambda * cc.eta_min;
  double worst = kInf;
  if (r >= td.up.band || r >= td.dn.band) {
    worst = std::min(td.up.band, td.dn.band) - r;
  } else {
    for (int k = 0; k < 9; ++k) {
      const double d = -r + 2.0 * r * k / 8.0;
      for (double v : level_set_mean_curvature(m, td.up.dist, d))
        worst = std::min(worst, v - hbound);
      for (double v : level_set_mean_curvature(m, td.dn.dist, -d))
        worst = std::min(worst, -v - hbound);
    }
  }
  ad.margin[3] = std::min(worst, cc.omega1 - r);

  ad.pass = true;
  for (int k = 0; k < 4; ++k) {
    ad.ok[k] = ad.margin[k] > 0.0;
    ad.pass = ad.pass && ad.ok[k];
  }
  return ad;
}

}  // namespace

UnstableRegion unstable_region(const Hypersurface& S, const Metric& m, const JacobiData& jd) {
  if (jd.eta.size() != S.base.size || m.rho.size() != S.ambient.size)
    throw std::invalid_argument("unstable region: mismatched section data");
  UnstableRegion ur;
  double period = 0.0;
  ur.arc = node_arcs(jd.ell, jd.h, &period);
  ur.intrinsic_period = period;
  std::size_t b = 0;
  for (std::size_t i = 1; i < jd.eta.size(); ++i)
    if (jd.eta[i] < jd.eta[b]) b = i;
  ur.center_index = b;
  ur.center_arc = ur.arc[b];
  double R0 = period / 8.0;
  int steps = 0;
  for (;;) {
    ur.phi_tilde = capacity_field(jd, ur.arc, period, ur.center_arc, R0);
    ur.Q = jacobi_quadratic_form(jd, ur.phi_tilde);
    if (ur.Q < 0.0) break;
    if (++steps > 12)
      throw std::runtime_error("unstable region: index form stayed nonnegative after 12 shrinks");
    R0 *= 0.5;
  }
  ur.shrink_steps = steps;
  ur.R0 = R0;
  ur.R = 0.45 * R0;
  ur.eta = jd.eta;
  return ur;
}

CalibratedConstants calibrate_constants(const Hypersurface& S, const Metric& m,
                                        const UnstableRegion& ur, const JacobiData& jd,
                                        double z0_cap, CalibrationReport* report) {
  if (!(z0_cap > 0.0)) throw std::invalid_argument("calibrate: z0 cap must be positive");
  CalibrationReport local;
  CalibrationReport* rep = report ? report : &local;
  rep->lines.clear();

  const CalContext cx = make_context(S, m, jd, ur.phi_tilde, ur.center_arc, ur.R);
  CalibratedConstants cc;
  cc.omega = cx.omega;
  cc.area_M = cx.area_M;
  cc.area_B = cx.area_B;
  cc.lambda = jd.lambda;
  cc.eta_min = jd.eta_min;
  cc.eta_max = jd.eta_max;
  cc.R = ur.R;
  cc.R0 = ur.R0;
  cc.center_arc = ur.center_arc;

  // Slide amplitude: walk the strictly decreasing prefix of the area profile.
  const int kSlide = 64;
  const double t_cap = 0.1 * cc.omega;
  std::vector<double> as(kSlide);
  for (int k = 0; k < kSlide; ++k)
    as[k] = both_area(cx, slide_field(cx, 0.0, t_cap * k / (kSlide - 1)));
  int i0 = 0;
  double min_drop = kInf;
  while (i0 + 1 < kSlide && as[i0 + 1] < as[i0]) {
    min_drop = std::min(min_drop, as[i0] - as[i0 + 1]);
    ++i0;
  }
  if (i0 == 0) throw std::runtime_error("calibration: the sliding family does not shed area");
  cc.t0 = t_cap * i0 / (kSlide - 1);
  cc.tau = 0.5 * (as[0] - as[i0]);
  push_line(rep, "slide-monotone", min_drop);

  // Push-out amplitude: largest c whose whole family keeps both area bounds.
  auto c_margins = [&](double c, double* hole, double* slide) {
    family_margins(cx, c, cc.t0, cc.tau, 33, 5, hole, slide);
  };
  double hole_m = 0.0, slide_m = 0.0;
  double c_hi = 0.8 * cc.omega;
  c_margins(c_hi, &hole_m, &slide_m);
  if (hole_m > 0.0 && slide_m > 0.0) {
    cc.c0 = c_hi;
  } else {
    double lo = 0.0, hi = c_hi;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      c_margins(mid, &hole_m, &slide_m);
      (hole_m > 0.0 && slide_m > 0.0 ? lo : hi) = mid;
    }
    cc.c0 = lo;
    c_margins(cc.c0, &hole_m, &slide_m);
  }
  if (!(cc.c0 > 1e-9 * cc.omega) || !(hole_m > 0.0) || !(slide_m > 0.0))
    fail("calibration: no admissible push-out amplitude", std::min(hole_m, slide_m));
  cc.margin_hole = hole_m;
  cc.margin_slide = slide_m;
  push_line(rep, "hole-area", hole_m);
  push_line(rep, "slide-area", slide_m);

  const double id_err = identity_error(cx);
  if (!(id_err <= 1e-12))
    fail("calibration: excised-area identity failed at the base point", 1e-12 - id_err);
  push_line(rep, "base-identity", 1e-12 - id_err);

  // Tube amplitude: largest z below the cap whose graphs stay mean-convex.
  const double z_hi = std::min(z0_cap, 0.999 * cc.c0 / jd.eta_max);
  double tube_m = tube_margin(cx, z_hi, 32);
  if (tube_m > 0.0) {
    cc.z0 = z_hi;
  } else {
    double lo = 0.0, hi = z_hi;
    for (int it = 0; it < 24; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tube_margin(cx, mid, 32) > 0.0 ? lo : hi) = mid;
    }
    cc.z0 = lo;
    tube_m = tube_margin(cx, cc.z0, 32);
  }
  if (!(cc.z0 > 1e-9 * cc.omega) || !(tube_m > 0.0))
    fail("calibration: the graph tube is never mean-convex", tube_m);
  push_line(rep, "tube-mean-convex", tube_m);
  push_line(rep, "tube-clearance", cc.c0 - cc.z0 * jd.eta_max);

  cc.K_A = family_kappa(cx, cc.c0, cc.t0, 9, 5);
  cc.omega1 = std::min(cc.z0 * jd.eta_min, cc.omega - cc.z0 * jd.eta_max);
  if (!(cc.omega1 > 0.0)) fail("calibration: the tube has no clearance", cc.omega1);
  push_line(rep, "tube-interior-clearance", cc.omega1);

  rep->refine_worst = refine_check(cx, ur, cc, rep);
  rep->verify_worst = alt_verify(cx, cc, rep);
  return cc;
}

Admissibility epsilon_admissibility(const Hypersurface& S, const Metric& m,
                                    const CalibratedConstants& cc, const JacobiData& jd,
                                    Epsilon eps) {
  const TubeDistances td = tube_distances(S, m, jd, cc.z0);
  return admissibility_impl(m, cc, td, eps);
}

double epsilon_star(const Hypersurface& S, const Metric& m, const CalibratedConstants& cc,
                    const JacobiData& jd) {
  const TubeDistances td = tube_distances(S, m, jd, cc.z0);
  auto pass = [&](double e) { return admissibility_impl(m, cc, td, Epsilon(e)).pass; };
  double hi = 0.3;
  if (pass(hi)) return hi;
  double lo = 1e-4;
  if (!pass(lo))
    throw std::runtime_error("admissibility: no epsilon above 1e-4 satisfies the conditions");
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pass(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace ac
