#pragma once

#include <string>
#include <vector>

#include "ac/calibrate.hpp"
#include "ac/spectrum.hpp"

namespace ac {

// Semi-implicit negative gradient flow of the tilted functional
// F(u) = E(u) - (mu / 2 sigma) int u dvol: the Laplacian is treated
// implicitly, W'/eps and the drive mu explicitly,
//   (I - dt eps lap_g) u_{k+1} = u_k + dt (mu - W'(u_k)/eps),
// so each step is one conjugate-gradient solve in L^2(dvol). mu = 0 gives the
// plain E flow.
struct FlowConfig {
  double dt = 0.0;        // 0 picks eps^2/8; the ceiling eps^2/4 is enforced
  int max_steps = 200000;
  double tol_res = 0.0;   // 0 picks 1e-8/eps; stop when sup|eps lap u - W'(u)/eps + mu| <= tol
  int cadence = 25;       // steps between monitor evaluations and trace samples
  double mu = 0.0;
};

struct FlowSample {
  double time = 0.0;
  double energy = 0.0;
  double perturbed = 0.0;     // F value; non-increasing within 1e-10 per step
  double residual_sup = 0.0;  // sup-norm of the negative gradient
  double min_negative_gradient = 0.0;  // mean-convexity monitor
  double min_u = 0.0;
  double max_u = 0.0;
};

// Samples are taken at step 0, every cadence steps, and at the final step.
// Snapshots keep the fields themselves at steps 0, s, 2s, ... where the
// stride s starts at the cadence and doubles whenever more than 64 fields
// would be retained; the final field is always appended. Two runs sharing a
// config therefore overlap on snapshot steps (one stride divides the other),
// which is what comparison_check intersects.
struct FlowTrace {
  std::vector<FlowSample> samples;
  std::vector<std::size_t> snapshot_steps;
  std::vector<Field> snapshots;
  int steps = 0;
  double dt = 0.0;  // effective step after any halvings
  double mu = 0.0;
  int cadence = 0;
  int dt_halvings = 0;
  bool tie_break = false;   // u0 was identically 0; a +1e-12 bias was added
  bool mean_convex = false; // monitor armed: min(-F'(u0)) > 0
  std::string verdict;      // "converged" or "timeout"
};

struct FlowResult {
  Field limit;
  FlowTrace trace;
  bool converged = false;
  SpectralReport stability;  // k = 1 report, computed for converged limits
  bool stability_computed = false;
};

// Monitors enforced while stepping: F decreases to 1e-10 per step; when the
// run starts mean-convex the field increases nodewise and the monitor stays
// positive at every cadence. A violated monitor halves dt and restarts from
// u0 (at most 8 times). |u| > 10 at any time is an instability error.
FlowResult flow(const Metric& m, const Field& u0, Epsilon eps, const FlowConfig& cfg = {});

// Discrete comparison principle for two runs of the same config with
// u0_above >= u0_below: nodewise ordering at every common snapshot step.
// Ordering broken beyond 1e-9 is a scheme error (runtime_error); mismatched
// effective dt / mu / cadence / shapes are invalid_argument.
struct ComparisonReport {
  std::size_t compared = 0;  // common snapshot steps checked
  double min_gap = 0.0;      // min over steps and nodes of above - below
  double limit_gap = 0.0;    // same for the two final snapshots
  bool ok = false;
};

ComparisonReport comparison_check(const FlowTrace& above, const FlowTrace& below);

// The constant solving W'(k) = eps mu on the branch through +1 (Newton);
// the stationary point of F among constants, k = 1 + eps mu / 2 + ...
double stationary_constant(Epsilon eps, double mu);

// Classification of a converged flow limit (residual above 1e-8/eps is a
// domain error): constant (sup - inf <= 1e-6) versus not. A non-constant
// limit is checked against the fixed witness tube of metric half-width
// omega/4 = (vertical period)/8 around the distinguished section: the limit
// must exceed 1/2 on all of it. A constant limit on the negative side is
// rejected outright (runtime_error); the admissible constant is near +1.
enum class DichotomyCase { Constant, Nonconstant };

struct DichotomyReport {
  DichotomyCase verdict = DichotomyCase::Constant;
  double spread = 0.0;          // sup - inf of the limit
  double constant_value = 0.0;  // midrange, meaningful for Constant
  double residual_sup = 0.0;
  double tube_semiwidth = 0.0;  // omega / 4
  std::size_t tube_nodes = 0;
  double witness_min = 0.0;     // min of the limit over the tube
  bool witness_ok = false;      // witness_min > 1/2
};

DichotomyReport dichotomy(const Metric& m, const Field& limit, Epsilon eps, double mu = 0.0);

// A converged critical point with its spectral verdict.
struct CriticalPoint {
  Field u;
  double energy = 0.0;
  double residual_sup = 0.0;  // sup-norm of the first variation
  SpectralReport spectrum;
  std::string provenance;
};

struct RelaxReport {
  double mu = 0.0;
  double energy_cap = 0.0;        // 2 area_M - tau + err
  double err = 0.0;               // (mu / 2 sigma)(1 + k) vol(N)
  double energy_cap_exact = 0.0;  // E(h) + (mu / 2 sigma)(k vol - int h)
  double ledger_worst = 0.0;      // min over samples of energy_cap - energy
  DichotomyReport dichotomy;
  FlowTrace stage_perturbed;
  FlowTrace stage_plain;
  bool anomaly = false;  // limit failed strict stability
};

// Two-stage relaxation: flow h under F with the drive mu (the barrier's
// residual doubled, unless base.mu overrides), classify the limit, then flow
// it under plain E and attach a k = 2 spectral report. Preconditions:
// barrier <= h nodewise and min(-F'(barrier)) > 0 for the chosen mu. Every
// trace sample of both stages must stay below the energy cap
// 2 area_M - tau + err (and below the sharper exact cap); a violation is a
// scheme error. An unstable limit is flagged as an anomaly, not thrown.
CriticalPoint two_stage_relax(const Metric& m, const Field& h, const Field& barrier,
                              const CalibratedConstants& cc, Epsilon eps,
                              const FlowConfig& base = {}, RelaxReport* report = nullptr);

}  // namespace ac
