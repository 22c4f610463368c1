#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "ac/distance.hpp"
#include "ac/energy.hpp"
#include "ac/flows.hpp"
#include "ac/hypersurface.hpp"
#include "ac/kernels.hpp"
#include "ac/operators.hpp"
#include "ac/potential.hpp"

namespace ac {

namespace {

constexpr double kBlowup = 10.0;
constexpr double kDissipationSlack = 1e-10;
constexpr double kMonotoneSlack = 1e-10;
constexpr double kOrderSlack = 1e-9;
constexpr int kMaxHalvings = 8;
constexpr std::size_t kMaxSnapshots = 64;

double sup_abs(const Field& f) {
  double s = 0.0;
  for (double v : f) s = std::max(s, std::fabs(v));
  return s;
}

double field_min(const Field& f) {
  double s = std::numeric_limits<double>::infinity();
  for (double v : f) s = std::min(s, v);
  return s;
}

struct CgWork {
  Field r, p, ap;
};

// (I - dt eps lap_g) x = b by conjugate gradients in L^2(dvol). x enters
// holding the previous field, so only the O(dt) increment remains to be
// resolved and late steps cost a handful of iterations.
void solve_implicit(const Metric& m, double dt_eps, const Field& b, Field& x, CgWork& w) {
  const auto& K = kernels::ops();
  const std::size_t n = b.size();
  const double* vol = m.vol.data();
  auto apply = [&](const Field& v, Field& out) {
    laplace_beltrami(m, v, out);
    const double* vd = v.data();
    double* o = out.data();
    for (std::size_t i = 0; i < n; ++i) o[i] = vd[i] - dt_eps * o[i];
  };
  w.r.resize(n);
  w.p.resize(n);
  w.ap.resize(n);
  apply(x, w.r);
  for (std::size_t i = 0; i < n; ++i) w.r[i] = b[i] - w.r[i];
  const double bb = K.dot_w(b.data(), b.data(), vol, n);
  const double target = 1e-24 * std::max(bb, 1e-300);
  double rr = K.dot_w(w.r.data(), w.r.data(), vol, n);
  if (rr <= target) return;
  w.p = w.r;
  for (int it = 0; it < 500; ++it) {
    apply(w.p, w.ap);
    const double pap = K.dot_w(w.p.data(), w.ap.data(), vol, n);
    if (!(pap > 0.0))
      throw std::runtime_error("flow: implicit operator lost positivity in CG");
    const double alpha = rr / pap;
    K.axpy(x.data(), alpha, w.p.data(), n);
    K.axpy(w.r.data(), -alpha, w.ap.data(), n);
    const double rr1 = K.dot_w(w.r.data(), w.r.data(), vol, n);
    if (rr1 <= target) return;
    const double beta = rr1 / rr;
    rr = rr1;
    double* p = w.p.data();
    const double* r = w.r.data();
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw std::runtime_error("flow: implicit solve stalled after 500 CG iterations");
}

// Append the field at `step`; on overflow double the stride and drop
// misaligned entries (the most recent entry is always retained).
void take_snapshot(FlowTrace& tr, std::size_t step, const Field& u, std::size_t& stride) {
  tr.snapshot_steps.push_back(step);
  tr.snapshots.push_back(u);
  if (tr.snapshots.size() <= kMaxSnapshots) return;
  stride *= 2;
  std::size_t keep = 0;
  const std::size_t last = tr.snapshot_steps.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    if (tr.snapshot_steps[i] % stride != 0 && i != last) continue;
    if (keep != i) {
      tr.snapshot_steps[keep] = tr.snapshot_steps[i];
      tr.snapshots[keep] = std::move(tr.snapshots[i]);
    }
    ++keep;
  }
  tr.snapshot_steps.resize(keep);
  tr.snapshots.resize(keep);
}

// One run at a fixed dt. Returns false when a monitor trips (caller halves
// dt and restarts); hard failures throw.
bool flow_attempt(const Metric& m, const Field& start, Epsilon eps, const FlowConfig& cfg,
                  double dt, double tol, int halvings, bool tie, FlowResult& out) {
  const auto& K = kernels::ops();
  const std::size_t n = start.size();
  const double* vol = m.vol.data();
  const double mu = cfg.mu;
  const double two_sigma = 2.0 * sigma_constant();
  const double inv_eps = 1.0 / eps.value;

  FlowTrace tr;
  tr.dt = dt;
  tr.mu = mu;
  tr.cadence = cfg.cadence;
  tr.dt_halvings = halvings;
  tr.tie_break = tie;

  Field u = start;
  Field unew(n), g(n), dw(n), b(n);
  CgWork w;

  // -F'(v) = eps lap v - W'(v)/eps + mu
  auto gradient = [&](const Field& v) {
    laplace_beltrami(m, v, g);
    K.dw_batch(v.data(), dw.data(), n);
    double* gd = g.data();
    const double* dwd = dw.data();
    for (std::size_t i = 0; i < n; ++i) gd[i] = eps.value * gd[i] - inv_eps * dwd[i] + mu;
  };
  double e_now = 0.0;  // E and F of the current field, refreshed per step
  double f_now = 0.0;
  auto evaluate = [&](const Field& v, double& e, double& f) {
    e = energy(m, v, eps).total;
    f = e - mu / two_sigma * K.sum_w(v.data(), vol, n);
  };
  auto sample = [&](std::size_t step) {
    FlowSample s;
    s.time = static_cast<double>(step) * dt;
    s.energy = e_now;
    s.perturbed = f_now;
    s.residual_sup = sup_abs(g);
    s.min_negative_gradient = field_min(g);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    s.min_u = *lo;
    s.max_u = *hi;
    tr.samples.push_back(s);
  };

  std::size_t stride = static_cast<std::size_t>(cfg.cadence);
  gradient(u);
  evaluate(u, e_now, f_now);
  tr.mean_convex = field_min(g) > 0.0;
  sample(0);
  take_snapshot(tr, 0, u, stride);
  bool converged = sup_abs(g) <= tol;

  std::size_t k = 0;
  const auto last_step = static_cast<std::size_t>(cfg.max_steps);
  bool tripped = false;
  while (!converged && k < last_step) {
    ++k;
    K.dw_batch(u.data(), dw.data(), n);
    {
      double* bd = b.data();
      const double* ud = u.data();
      const double* dwd = dw.data();
      for (std::size_t i = 0; i < n; ++i) bd[i] = ud[i] + dt * (mu - inv_eps * dwd[i]);
    }
    unew = u;
    solve_implicit(m, dt * eps.value, b, unew, w);
    if (sup_abs(unew) > kBlowup)
      throw std::runtime_error("flow: |u| exceeded 10, the step is unstable");
    double e_next = 0.0, f_next = 0.0;
    evaluate(unew, e_next, f_next);
    if (!(f_next <= f_now + kDissipationSlack)) {
      tripped = true;  // dissipation monitor
      break;
    }
    if (tr.mean_convex) {
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) dmin = std::min(dmin, unew[i] - u[i]);
      if (dmin < -kMonotoneSlack) {
        tripped = true;  // nodewise monotonicity under mean convexity
        break;
      }
    }
    u.swap(unew);
    e_now = e_next;
    f_now = f_next;
    if (k % static_cast<std::size_t>(cfg.cadence) == 0 || k == last_step) {
      gradient(u);
      if (tr.mean_convex && field_min(g) <= -kOrderSlack * (1.0 + mu)) {
        tripped = true;  // sign of the negative gradient must persist
        break;
      }
      sample(k);
      if (k % stride == 0) take_snapshot(tr, k, u, stride);
      converged = sup_abs(g) <= tol;
    }
  }
  if (tripped) return false;

  if (tr.snapshot_steps.back() != k) take_snapshot(tr, k, u, stride);
  tr.steps = static_cast<int>(k);
  tr.verdict = converged ? "converged" : "timeout";
  out.trace = std::move(tr);
  out.limit = std::move(u);
  out.converged = converged;
  return true;
}

}  // namespace

FlowResult flow(const Metric& m, const Field& u0, Epsilon eps, const FlowConfig& cfg) {
  check_shape(m.grid, u0, "flow");
  const double e2 = eps.value * eps.value;
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt))
    throw std::invalid_argument("flow: dt must be a nonnegative number");
  const double dt0 = cfg.dt > 0.0 ? cfg.dt : e2 / 8.0;
  if (dt0 > e2 / 4.0 * (1.0 + 1e-12))
    throw std::invalid_argument("flow: dt exceeds the stability ceiling eps^2/4");
  if (cfg.max_steps < 1) throw std::invalid_argument("flow: max_steps must be positive");
  if (cfg.cadence < 1) throw std::invalid_argument("flow: cadence must be positive");
  if (!(cfg.mu >= 0.0) || !std::isfinite(cfg.mu))
    throw std::invalid_argument("flow: mu must be nonnegative");
  if (!(cfg.tol_res >= 0.0) || !std::isfinite(cfg.tol_res))
    throw std::invalid_argument("flow: tol_res must be a nonnegative number");
  const double tol = cfg.tol_res > 0.0 ? cfg.tol_res : 1e-8 / eps.value;
  if (sup_abs(u0) > kBlowup)
    throw std::runtime_error("flow: start field leaves |u| <= 10");

  bool tie = true;
  for (double v : u0)
    if (v != 0.0) {
      tie = false;
      break;
    }
  Field start = u0;
  if (tie)
    for (double& v : start) v = 1e-12;

  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    const double dt = dt0 / static_cast<double>(1 << halving);
    FlowResult res;
    if (!flow_attempt(m, start, eps, cfg, dt, tol, halving, tie, res)) continue;
    if (res.converged) {
      res.stability = spectrum(m, res.limit, eps, 1);
      res.stability_computed = true;
    }
    return res;
  }
  throw std::runtime_error("flow: monitors failed at every dt down to dt0/256");
}

ComparisonReport comparison_check(const FlowTrace& above, const FlowTrace& below) {
  if (above.snapshots.empty() || below.snapshots.empty())
    throw std::invalid_argument("comparison_check: traces carry no snapshots");
  if (above.snapshots.front().size() != below.snapshots.front().size())
    throw std::invalid_argument("comparison_check: traces live on different grids");
  if (above.dt != below.dt || above.mu != below.mu || above.cadence != below.cadence)
    throw std::invalid_argument("comparison_check: traces come from different configs");
  const std::size_t n = above.snapshots.front().size();
  auto gap_of = [n](const Field& a, const Field& b) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) gap = std::min(gap, a[i] - b[i]);
    return gap;
  };
  if (gap_of(above.snapshots.front(), below.snapshots.front()) < 0.0)
    throw std::invalid_argument("comparison_check: start fields are not ordered");

  ComparisonReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  std::size_t j = 0;
  for (std::size_t i = 0; i < above.snapshot_steps.size(); ++i) {
    const std::size_t step = above.snapshot_steps[i];
    while (j < below.snapshot_steps.size() && below.snapshot_steps[j] < step) ++j;
    if (j == below.snapshot_steps.size()) break;
    if (below.snapshot_steps[j] != step) continue;
    const double gap = gap_of(above.snapshots[i], below.snapshots[j]);
    rep.min_gap = std::min(rep.min_gap, gap);
    ++rep.compared;
    if (gap < -kOrderSlack)
      throw std::runtime_error("comparison_check: ordering failed at step " +
                               std::to_string(step) + " by " + std::to_string(-gap));
  }
  if (rep.compared == 0)
    throw std::invalid_argument("comparison_check: no common snapshot steps");
  rep.limit_gap = gap_of(above.snapshots.back(), below.snapshots.back());
  if (rep.limit_gap < -kOrderSlack)
    throw std::runtime_error("comparison_check: ordering failed between the final fields");
  rep.ok = true;
  return rep;
}

double stationary_constant(Epsilon eps, double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("stationary_constant: mu must be nonnegative");
  const double c = eps.value * mu;
  double x = 1.0 + 0.5 * c;  // above the root, where W' - c is convex
  for (int it = 0; it < 80; ++it) {
    const double step = (Potential::dw(x) - c) / Potential::d2w(x);
    x -= step;
    if (std::fabs(step) <= 1e-15 * std::max(1.0, std::fabs(x))) break;
  }
  return x;
}

DichotomyReport dichotomy(const Metric& m, const Field& limit, Epsilon eps, double mu) {
  check_shape(m.grid, limit, "dichotomy");
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("dichotomy: mu must be nonnegative");
  DichotomyReport rep;
  {
    const Field g = perturbed_first_variation(m, limit, eps, mu);
    rep.residual_sup = sup_abs(g);
  }
  const double tol = 1e-8 / eps.value;
  if (rep.residual_sup > tol * (1.0 + 1e-7))
    throw std::domain_error("dichotomy: residual " + std::to_string(rep.residual_sup) +
                            " says the field is not a converged limit");
  const auto [lo, hi] = std::minmax_element(limit.begin(), limit.end());
  rep.spread = *hi - *lo;
  rep.constant_value = 0.5 * (*hi + *lo);
  if (rep.spread <= 1e-6) {
    rep.verdict = DichotomyCase::Constant;
    if (rep.constant_value <= 0.0)
      throw std::runtime_error(
          "dichotomy: the limit is a negative constant; the admissible branch passes "
          "through +1");
    return rep;
  }
  rep.verdict = DichotomyCase::Nonconstant;
  if (!m.y_profile)
    throw std::invalid_argument("dichotomy: the witness tube needs a vertical-profile metric");
  const double pv = vertical_period(m, 0);
  rep.tube_semiwidth = pv / 8.0;  // omega / 4 with omega = pv / 2
  const Hypersurface s0 = level_surface(m.grid, 0.0, pv / 2.0);
  const SignedDistanceField sd = signed_distance(s0, m);
  double wmin = std::numeric_limits<double>::infinity();
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < limit.size(); ++i) {
    if (std::fabs(sd.dist[i]) > rep.tube_semiwidth) continue;
    wmin = std::min(wmin, limit[i]);
    ++cnt;
  }
  rep.tube_nodes = cnt;
  rep.witness_min = wmin;
  rep.witness_ok = cnt > 0 && wmin > 0.5;
  return rep;
}

CriticalPoint two_stage_relax(const Metric& m, const Field& h, const Field& barrier,
                              const CalibratedConstants& cc, Epsilon eps,
                              const FlowConfig& base, RelaxReport* report) {
  check_shape(m.grid, h, "two_stage_relax");
  check_shape(m.grid, barrier, "two_stage_relax");
  for (std::size_t i = 0; i < h.size(); ++i)
    if (barrier[i] > h[i])
      throw std::invalid_argument("two_stage_relax: the barrier must sit below the start");
  if (!(base.mu >= 0.0) || !std::isfinite(base.mu))
    throw std::invalid_argument("two_stage_relax: mu must be nonnegative");

  const Field g0 = first_variation(m, barrier, eps);
  const double mu = base.mu > 0.0 ? base.mu : 2.0 * sup_abs(g0);
  if (!(mu > 0.0))
    throw std::invalid_argument("two_stage_relax: the drive mu vanished");
  if (!(field_min(g0) + mu > 0.0))
    throw std::invalid_argument("two_stage_relax: the barrier is not mean-convex at mu = " +
                                std::to_string(mu));

  const double two_sigma = 2.0 * sigma_constant();
  const double k_top = stationary_constant(eps, mu);
  const double cap_err = mu / two_sigma * (1.0 + k_top) * m.volume;
  const double cap = 2.0 * cc.area_M - cc.tau + cap_err;
  // The flow stays in [min h, k_top], so F-dissipation bounds every E value
  // by E(h) + (mu / 2 sigma)(k_top vol - int h).
  const double cap_exact =
      energy(m, h, eps).total + mu / two_sigma * (k_top * m.volume - integrate(m, h));

  double ledger_worst = std::numeric_limits<double>::infinity();
  auto audit = [&](const FlowTrace& tr, const char* stage) {
    for (const FlowSample& s : tr.samples) {
      if (s.energy > cap + 1e-9)
        throw std::runtime_error(std::string("two_stage_relax: energy cap broken in the ") +
                                 stage + " stage at t = " + std::to_string(s.time));
      if (s.energy > cap_exact + 1e-9)
        throw std::runtime_error(std::string("two_stage_relax: exact energy cap broken in the ") +
                                 stage + " stage at t = " + std::to_string(s.time));
      ledger_worst = std::min(ledger_worst, cap - s.energy);
    }
  };

  FlowConfig cfg_f = base;
  cfg_f.mu = mu;
  FlowResult rf = flow(m, h, eps, cfg_f);
  if (!rf.converged)
    throw std::runtime_error("two_stage_relax: the perturbed stage hit max_steps");
  audit(rf.trace, "perturbed");
  const DichotomyReport dic = dichotomy(m, rf.limit, eps, mu);

  FlowConfig cfg_e = base;
  cfg_e.mu = 0.0;
  FlowResult re = flow(m, rf.limit, eps, cfg_e);
  if (!re.converged)
    throw std::runtime_error("two_stage_relax: the plain stage hit max_steps");
  audit(re.trace, "plain");

  CriticalPoint cp;
  cp.energy = energy(m, re.limit, eps).total;
  cp.residual_sup = sup_abs(first_variation(m, re.limit, eps));
  // Waist pairs carry a near-degenerate lowest pair (symmetric/antisymmetric
  // combinations split by interface tunnelling), which converges slowly.
  cp.spectrum = spectrum(m, re.limit, eps, 2, 1e-9, 3200);
  cp.provenance = dic.verdict == DichotomyCase::Nonconstant ? "two-stage relax, case (b)"
                                                            : "two-stage relax, case (a)";
  const bool anomaly = cp.spectrum.eigenvalues[0] < -cp.spectrum.tol;
  if (report) {
    report->mu = mu;
    report->energy_cap = cap;
    report->err = cap_err;
    report->energy_cap_exact = cap_exact;
    report->ledger_worst = ledger_worst;
    report->dichotomy = dic;
    report->stage_perturbed = std::move(rf.trace);
    report->stage_plain = std::move(re.trace);
    report->anomaly = anomaly;
  }
  cp.u = std::move(re.limit);
  return cp;
}

}  // namespace ac
