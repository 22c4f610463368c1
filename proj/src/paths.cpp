#include "ac/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "ac/parallel.hpp"
#include "ac/potential.hpp"
#include "ac/profiles.hpp"

namespace ac {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ring_distance(double a, double b, double period) {
  double d = std::fmod(std::fabs(a - b), period);
  return std::min(d, period - d);
}

// Hole cutoff: 1 on the excised ball, 0 beyond twice its radius, raised
// cosine in between. Arc slope at most pi/(2R), inside the 2/R cap.
double hole_shape(double r, double R) {
  if (r <= R) return 1.0;
  if (r >= 2.0 * R) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (r - R) / R));
}

// Vertical height map F (F' = rho) in closed form for the profile families.
// The fine quadrature needs millions of evaluations per leg, so the tabulated
// walk in vertical_length is kept only for Custom profiles.
struct VerticalMap {
  const Metric* m = nullptr;

  double forward(double z) const {
    switch (m->family) {
      case Metric::Family::Flat:
        return z;
      case Metric::Family::Neck:
        return z + m->amplitude * m->wavelength / (2.0 * kPi) *
                       std::sin(2.0 * kPi / m->wavelength * z);
      default:
        return vertical_length(*m, 0, 0.0, z);
    }
  }

  // Solve forward(z) = s: bracketed Newton, warm-started from z0.
  double invert(double s, double z0) const {
    if (m->family == Metric::Family::Flat) return s;
    double lo = std::min(s / m->rho_min, s / m->rho_max) - 1e-9;
    double hi = std::max(s / m->rho_min, s / m->rho_max) + 1e-9;
    double z = (z0 > lo && z0 < hi) ? z0 : 0.5 * (lo + hi);
    const double tol = 1e-12 * (1.0 + std::fabs(s));
    for (int it = 0; it < 200; ++it) {
      const double f = forward(z) - s;
      if (std::fabs(f) <= tol) return z;
      (f > 0.0 ? hi : lo) = z;
      z -= f / m->rho_at_y(z);
      if (!(z > lo && z < hi)) z = 0.5 * (lo + hi);
    }
    throw std::runtime_error("paths: vertical inversion stalled");
  }
};

// Shared data for the leg builders: wrapped vertical heights per node, the
// hole cutoff and capacity field with flat-x derivatives, the ambient
// profile, and the continuity budget.
struct Frame {
  const Hypersurface* S = nullptr;
  const Metric* m = nullptr;
  const CalibratedConstants* cc = nullptr;
  const UnstableRegion* ur = nullptr;
  double eps = 0.0;
  double sup = 0.0;  // profile support radius, 2 eps Lambda
  double hol = 0.0;  // full collapse offset, 4 eps Lambda
  Profile1D prof;
  VerticalMap vm;
  std::size_t ncol = 0;
  int nz = 0;
  double hx = 0.0;
  double Pv = 0.0;   // vertical metric period
  int jmirror = -1;  // j + mirror(j) == jmirror mod nz; negative when off-lattice
  std::vector<double> f0;     // vertical height of the base curve per column
  std::vector<double> df0;    // flat-x derivative of f0
  std::vector<double> swabs;  // |wrapped metric height| per ambient node
  std::vector<double> chi, dchi;
  std::vector<double> phit, dphit;
  double delta = 0.0;  // L2 continuity budget
  double sigma = 0.0;

  double value(double a) const {
    if (a >= sup) return 1.0;
    if (a <= -sup) return -1.0;
    return prof.value(a);
  }
};

std::vector<double> flat_derivative(const std::vector<double>& f, double hx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * hx);
  return d;
}

Frame make_frame(const Hypersurface& S, const Metric& m, const CalibratedConstants& cc,
                 const UnstableRegion& ur, Epsilon eps, bool force) {
  if (!m.y_profile) throw std::invalid_argument("paths: vertical-profile metric required");
  const Grid& g = m.grid;
  if (g.d != 2) throw std::invalid_argument("paths: ring sections only");
  if (S.base.size != ur.phi_tilde.size() || S.base.size != ur.eta.size() ||
      m.rho.size() != S.ambient.size)
    throw std::invalid_argument("paths: mismatched section data");

  // The three scale margins; the curvature scan lives in epsilon_admissibility.
  const double r = 2.0 * eps.support_radius();
  const bool ok = cc.c0 / 20.0 > r && cc.z0 * cc.eta_min > r &&
                  cc.c0 - cc.z0 * cc.eta_max > 2.0 * r;
  if (!ok && !force)
    throw std::invalid_argument("paths: epsilon outside the admissible margins");

  Frame fr;
  fr.S = &S;
  fr.m = &m;
  fr.cc = &cc;
  fr.ur = &ur;
  fr.eps = eps.value;
  fr.sup = eps.support_radius();
  fr.hol = 2.0 * fr.sup;
  fr.prof = truncate(heteroclinic(), eps).rescaled(eps.value);
  fr.vm.m = &m;
  fr.ncol = S.base.size;
  fr.nz = g.dims[1];
  fr.hx = g.h[0];
  fr.Pv = vertical_period(m, 0);
  fr.sigma = sigma_constant();
  fr.delta = 0.05 * std::sqrt(m.volume);

  const double jm = 2.0 * S.level / g.h[1];
  fr.jmirror = std::fabs(jm - std::round(jm)) < 1e-9 ? static_cast<int>(std::llround(jm)) : -1;

  fr.f0.resize(fr.ncol);
  for (std::size_t i = 0; i < fr.ncol; ++i) fr.f0[i] = fr.vm.forward(S.level + S.phi[i]);
  fr.df0 = flat_derivative(fr.f0, fr.hx);

  fr.swabs.resize(m.rho.size());
  for (int j = 0; j < fr.nz; ++j) {
    const double Fz = fr.vm.forward(g.h[1] * j);
    for (std::size_t i = 0; i < fr.ncol; ++i)
      fr.swabs[S.column(i, j)] = std::fabs(std::remainder(Fz - fr.f0[i], fr.Pv));
  }

  fr.chi.resize(fr.ncol);
  for (std::size_t i = 0; i < fr.ncol; ++i)
    fr.chi[i] = hole_shape(ring_distance(ur.arc[i], ur.center_arc, ur.intrinsic_period), ur.R);
  fr.dchi = flat_derivative(fr.chi, fr.hx);
  fr.phit.assign(ur.phi_tilde.begin(), ur.phi_tilde.end());
  fr.dphit = flat_derivative(fr.phit, fr.hx);
  return fr;
}

// Slab description of one sample: semi-width c(x) = slab_base + slab_t *
// phi_tilde(x), collapse offset T(x) = hole_T * chi(x) + hole_r. The field is
// profile(c - |sw| - T).
struct SampleSpec {
  double slab_base = 0.0;
  double slab_t = 0.0;
  double hole_T = 0.0;
  double hole_r = 0.0;
};

double slab_width(const Frame& fr, const SampleSpec& sp, std::size_t i) {
  return sp.slab_base + sp.slab_t * fr.phit[i];
}

double collapse(const Frame& fr, const SampleSpec& sp, std::size_t i) {
  return sp.hole_T * fr.chi[i] + sp.hole_r;
}

Field assemble(const Frame& fr, const SampleSpec& sp) {
  Field u(fr.swabs.size());
  for (std::size_t i = 0; i < fr.ncol; ++i) {
    const double c = slab_width(fr, sp, i);
    if (!(c + fr.sup < 0.5 * fr.Pv))
      throw std::invalid_argument("paths: construction leaves the tubular neighbourhood");
    const double a0 = c - collapse(fr, sp, i);
    for (int j = 0; j < fr.nz; ++j) {
      const std::size_t n = fr.S->column(i, j);
      u[n] = fr.value(a0 - fr.swabs[n]);
    }
  }
  return u;
}

// Energy of one sample by per-column quadrature in the vertical metric
// height. Across each transition window the integrand is evaluated on the
// exact vertical geometry (A_z^2 = rho^2), with the tangential part from the
// flat-x derivatives of the slab data; composite Simpson at metric step
// eps/10 keeps the profile-cost error far below the calibrated margins.
struct SampleEnergy {
  EnergyReport rep;
  double tangential = 0.0;
};

SampleEnergy sample_energy(const Frame& fr, const SampleSpec& sp) {
  const Potential pot{};
  double grad = 0.0, potential = 0.0, tang = 0.0;
  for (std::size_t i = 0; i < fr.ncol; ++i) {
    const double c = slab_width(fr, sp, i);
    const double T = collapse(fr, sp, i);
    const double whi = std::min(c - T + fr.sup, 0.5 * fr.Pv);
    const double wlo = std::max(c - T - fr.sup, 0.0);
    if (whi <= wlo) continue;  // column fully collapsed or fully plateau
    const double dc = sp.slab_t * fr.dphit[i] - sp.hole_T * fr.dchi[i];
    int nsub = static_cast<int>(std::ceil((whi - wlo) / (0.1 * fr.eps)));
    nsub += nsub & 1;
    nsub = std::max(nsub, 2);
    const double step = (whi - wlo) / nsub;
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? 1.0 : -1.0;
      const double gx = dc + sgn * fr.df0[i];
      const double gx2 = gx * gx;
      double z = 0.0;
      bool warm = false;
      double cg = 0.0, cp = 0.0, ct = 0.0;
      for (int k = 0; k <= nsub; ++k) {
        const double sw = wlo + step * k;
        const double target = fr.f0[i] + sgn * sw;
        z = fr.vm.invert(target, warm ? z + sgn * step / fr.m->rho_at_y(z) : target);
        warm = true;
        const double rho = fr.m->rho_at_y(z);
        const double a = c - sw - T;
        const double dp = std::fabs(a) >= fr.sup ? 0.0 : fr.prof.slope(a);
        const double w = pot.w(fr.value(a));
        const double wt = (k == 0 || k == nsub) ? 1.0 : (k & 1 ? 4.0 : 2.0);
        cg += wt * 0.5 * fr.eps * dp * dp * (rho + gx2 / rho);
        ct += wt * 0.5 * fr.eps * dp * dp * (gx2 / rho);
        cp += wt * rho * w / fr.eps;
      }
      grad += cg * step / 3.0;
      tang += ct * step / 3.0;
      potential += cp * step / 3.0;
    }
  }
  const double pref = fr.hx / (2.0 * fr.sigma);
  SampleEnergy out;
  out.rep.epsilon = fr.eps;
  out.rep.sigma = fr.sigma;
  out.rep.gradient_term = pref * grad;
  out.rep.potential_term = pref * potential;
  out.rep.total = out.rep.gradient_term + out.rep.potential_term;
  out.rep.equipartition_defect =
      std::fabs(out.rep.gradient_term - out.rep.potential_term) / std::max(out.rep.total, 1e-300);
  out.tangential = pref * tang;
  return out;
}

double even_defect(const Frame& fr, const Field& u) {
  if (fr.jmirror < 0) return 0.0;
  const Grid& g = fr.m->grid;
  double worst = 0.0;
  for (int j = 0; j < fr.nz; ++j) {
    const int jr = g.wrap(fr.jmirror - j, 1);
    if (jr < j) continue;
    for (std::size_t i = 0; i < fr.ncol; ++i)
      worst = std::max(worst, std::fabs(u[fr.S->column(i, j)] - u[fr.S->column(i, jr)]));
  }
  return worst;
}

double step_l2(const Frame& fr, const Field& a, const Field& b) {
  const Field& vol = fr.m->vol;
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    s += d * d * vol[n];
  }
  return std::sqrt(s);
}

struct LegSpec {
  std::string label;
  double p_hi = 0.0;  // parameter range [0, p_hi]
  int n_min = 1;
  double bound = 0.0;
  std::function<SampleSpec(double)> at;
};

PathSegment build_samples(const Frame& fr, const LegSpec& leg, int nsub) {
  PathSegment seg;
  seg.label = leg.label;
  seg.bound = leg.bound;
  seg.delta_path = fr.delta;
  const std::size_t count = static_cast<std::size_t>(nsub) + 1;
  seg.params.resize(count);
  seg.energies.resize(count);
  seg.tangential.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    seg.params[k] = leg.p_hi * (static_cast<double>(k) / nsub);
  const std::size_t stride =
      count <= 64 ? 1 : (count + 62) / 63;  // decimation: at most 64 kept fields

  const std::size_t chunk = std::max<std::size_t>(2 * thread_budget(), 8);
  std::vector<Field> buf;
  Field prev;
  for (std::size_t c0 = 0; c0 < count; c0 += chunk) {
    const std::size_t cn = std::min(chunk, count - c0);
    buf.assign(cn, Field());
    std::vector<double> defects(cn, 0.0);
    parallel_for(cn, [&](std::size_t k) {
      const SampleSpec sp = leg.at(seg.params[c0 + k]);
      buf[k] = assemble(fr, sp);
      const SampleEnergy se = sample_energy(fr, sp);
      seg.energies[c0 + k] = se.rep;
      seg.tangential[c0 + k] = se.tangential;
      defects[k] = even_defect(fr, buf[k]);
    });
    for (std::size_t k = 0; k < cn; ++k) {
      const std::size_t idx = c0 + k;
      seg.max_even_defect = std::max(seg.max_even_defect, defects[k]);
      if (idx > 0) seg.max_step_l2 = std::max(seg.max_step_l2, step_l2(fr, prev, buf[k]));
      if (idx % stride == 0 || idx + 1 == count) {
        seg.stored_at.push_back(idx);
        seg.fields.push_back(buf[k]);
      }
      prev = std::move(buf[k]);
    }
  }
  seg.max_energy = 0.0;
  for (const auto& r : seg.energies) seg.max_energy = std::max(seg.max_energy, r.total);
  return seg;
}

PathSegment build_leg(const Frame& fr, const LegSpec& leg) {
  int nsub = std::max(leg.n_min, 1);
  for (int attempt = 0;; ++attempt) {
    PathSegment seg = build_samples(fr, leg, nsub);
    if (seg.max_step_l2 <= seg.delta_path) return seg;
    if (attempt == 3) throw std::runtime_error("paths: continuity budget unmet");
    nsub *= 2;
  }
}

void check_anchor(const Field& given, const Field& expect, const char* what) {
  if (given.size() != expect.size())
    throw std::invalid_argument(std::string("paths: ") + what + ": wrong field size");
  for (std::size_t n = 0; n < given.size(); ++n)
    if (given[n] != expect[n])
      throw std::invalid_argument(std::string("paths: ") + what +
                                  ": field does not match the expected construction");
}

LegSpec slide_spec(const Frame& fr) {
  LegSpec leg;
  leg.label = "slide";
  leg.p_hi = fr.hol;
  leg.n_min = static_cast<int>(std::ceil(4.0 * fr.hol / fr.eps));
  leg.bound = 2.0 * (fr.cc->area_M - fr.cc->area_B);
  const double base = fr.sup, hol = fr.hol;
  leg.at = [base, hol](double xi) { return SampleSpec{base, 0.0, hol, hol - xi}; };
  return leg;
}

LegSpec open_spec(const Frame& fr) {
  LegSpec leg;
  leg.label = "open";
  leg.p_hi = fr.cc->t0;
  leg.n_min = static_cast<int>(std::ceil(4.0 * fr.cc->t0 * fr.cc->eta_max / fr.eps));
  leg.bound = 2.0 * (fr.cc->area_M - 0.75 * fr.cc->area_B);
  const double base = fr.sup, hol = fr.hol;
  leg.at = [base, hol](double t) { return SampleSpec{base, t, hol, 0.0}; };
  return leg;
}

LegSpec close_spec(const Frame& fr) {
  LegSpec leg;
  leg.label = "close";
  leg.p_hi = 1.0;
  leg.n_min = static_cast<int>(std::ceil(4.0 * fr.hol / fr.eps));
  leg.bound = 2.0 * fr.cc->area_M - fr.cc->tau;
  const double base = fr.sup, hol = fr.hol, t0 = fr.cc->t0;
  leg.at = [base, hol, t0](double s) { return SampleSpec{base, t0, hol * (1.0 - s), 0.0}; };
  return leg;
}

LegSpec push_spec(const Frame& fr) {
  LegSpec leg;
  leg.label = "push";
  leg.p_hi = fr.cc->c0 - fr.sup;
  leg.n_min = static_cast<int>(std::ceil(4.0 * leg.p_hi / fr.eps));
  leg.bound = 2.0 * fr.cc->area_M - fr.cc->tau;
  const double base = fr.sup, t0 = fr.cc->t0;
  leg.at = [base, t0](double r) { return SampleSpec{base + r, t0, 0.0, 0.0}; };
  return leg;
}

}  // namespace

Field build_f(const Hypersurface& S, const Metric& m, const CalibratedConstants& cc,
              const UnstableRegion& ur, Epsilon eps, bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  return assemble(fr, SampleSpec{fr.sup, 0.0, fr.hol, 0.0});
}

PathSegment slide_to_minus_one(const Field& f, const Hypersurface& S, const Metric& m,
                               const CalibratedConstants& cc, const UnstableRegion& ur,
                               Epsilon eps, bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  const LegSpec leg = slide_spec(fr);
  check_anchor(f, assemble(fr, leg.at(leg.p_hi)), "slide");
  return build_leg(fr, leg);
}

PathSegment open_graph_deformation(const Field& f, const Hypersurface& S, const Metric& m,
                                   const CalibratedConstants& cc, const UnstableRegion& ur,
                                   Epsilon eps, bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  const LegSpec leg = open_spec(fr);
  check_anchor(f, assemble(fr, leg.at(0.0)), "open");
  return build_leg(fr, leg);
}

PathSegment close_hole(const Field& g, const Hypersurface& S, const Metric& m,
                       const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                       bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  const LegSpec leg = close_spec(fr);
  check_anchor(g, assemble(fr, leg.at(0.0)), "close");
  return build_leg(fr, leg);
}

PathSegment push_out(const Field& g, const Hypersurface& S, const Metric& m,
                     const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                     bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  const LegSpec leg = push_spec(fr);
  check_anchor(g, assemble(fr, leg.at(0.0)), "push");
  return build_leg(fr, leg);
}

CompositePath composite_path(const Hypersurface& S, const Metric& m,
                             const CalibratedConstants& cc, const UnstableRegion& ur,
                             Epsilon eps, bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  CompositePath path;
  path.segments.push_back(build_leg(fr, slide_spec(fr)));
  path.segments.push_back(build_leg(fr, open_spec(fr)));
  path.segments.push_back(build_leg(fr, close_spec(fr)));
  path.segments.push_back(build_leg(fr, push_spec(fr)));

  for (double v : path.segments.front().fields.front())
    if (v != -1.0) throw std::runtime_error("paths: composite does not start at -1");
  for (std::size_t s = 1; s < path.segments.size(); ++s) {
    const Field& a = path.segments[s - 1].fields.back();
    const Field& b = path.segments[s].fields.front();
    for (std::size_t n = 0; n < a.size(); ++n)
      if (a[n] != b[n]) throw std::runtime_error("paths: segment weld mismatch");
  }

  path.max_energy = 0.0;
  for (const auto& seg : path.segments) path.max_energy = std::max(path.max_energy, seg.max_energy);
  path.sigma_gap = 2.0 * cc.area_M - path.max_energy;
  path.final_field = path.segments.back().fields.back();
  return path;
}

Barrier build_barrier(const Field& h, const Hypersurface& S, const Metric& m,
                      const CalibratedConstants& cc, const UnstableRegion& ur, Epsilon eps,
                      bool force) {
  const Frame fr = make_frame(S, m, cc, ur, eps, force);
  if (h.size() != m.rho.size()) throw std::invalid_argument("paths: barrier: wrong field size");

  Barrier bar;
  bar.field.resize(fr.swabs.size());
  for (std::size_t i = 0; i < fr.ncol; ++i) {
    const double c = cc.z0 * fr.ur->eta[i];
    for (int j = 0; j < fr.nz; ++j) {
      const std::size_t n = fr.S->column(i, j);
      bar.field[n] = fr.value(c - fr.swabs[n]);
    }
  }
  for (std::size_t n = 0; n < h.size(); ++n)
    if (bar.field[n] > h[n]) throw std::runtime_error("paths: barrier exceeds the pushed endpoint");

  const Field fv = first_variation(m, bar.field, eps);
  double sup = 0.0;
  for (double v : fv) sup = std::max(sup, std::fabs(v));
  bar.mu = 2.0 * sup;
  bar.min_negative_gradient = bar.mu;
  for (double v : fv) bar.min_negative_gradient = std::min(bar.min_negative_gradient, v + bar.mu);
  if (!(bar.min_negative_gradient > 0.0))
    throw std::runtime_error("paths: barrier positivity failed");
  return bar;
}

SegmentProfile profile_energy(const PathSegment& seg) {
  SegmentProfile table;
  table.param = seg.params;
  table.energy.reserve(seg.energies.size());
  table.running_max.reserve(seg.energies.size());
  table.margin.reserve(seg.energies.size());
  double run = 0.0;
  for (const auto& r : seg.energies) {
    run = std::max(run, r.total);
    table.energy.push_back(r.total);
    table.running_max.push_back(run);
    table.margin.push_back(seg.bound - r.total);
  }
  return table;
}

}  // namespace ac
