#pragma once

#include <functional>
#include <limits>

#include "ac/epsilon.hpp"
#include "ac/potential.hpp"

namespace ac {

// Plateau bump: 1 on |s| <= 1, exp(1 - 1/(1-(|s|-1)^2)) on 1 < |s| < 2,
// 0 beyond; all derivatives vanish at the outer support edge |s| = 2.
double cutoff_chi(double s);
double cutoff_chi_d1(double s);
double cutoff_chi_d2(double s);

// One-dimensional connecting profile, evaluated lazily. The profile is
// identically +-1 beyond the support radius (infinite for the untruncated
// heteroclinic).
struct Profile1D {
  std::function<double(double)> value;
  std::function<double(double)> slope;
  std::function<double(double)> curvature;
  double support_radius = std::numeric_limits<double>::infinity();

  // Same profile in ambient units: r -> value(r / eps).
  Profile1D rescaled(double eps) const;
};

// The monotone solution of u'' = W'(u) with u(0) = 0: tanh(r/sqrt(2)) for
// the standard well.
Profile1D heteroclinic(const Potential& p = Potential{});

// Plateau-truncated profile: identical to h inside (-Lambda, Lambda),
// exactly +-1 outside +-2 Lambda, Lambda = 3|log eps| (unit scale; compose
// with rescaled(eps.value) for the ambient version).
Profile1D truncate(const Profile1D& h, Epsilon eps);

// Collapsing barrier profile Psi_t(r) = hbar^eps(-|r| + 2 eps Lambda - t):
// even in r, == -1 beyond the dead-zone radius max(0, 4 eps Lambda - t),
// identically -1 once t >= 4 eps Lambda.
struct CollapsingProfile {
  double t = 0.0;
  double epsilon = 0.0;
  double dead_zone = 0.0;
  std::function<double(double)> value;
  std::function<double(double)> slope;  // one-sided at the even-reflection corner r = 0
};

CollapsingProfile collapsing_family(Epsilon eps, double t);

// (1/2 sigma) int_{-R}^{R} [ eps p'^2 / 2 + W(p)/eps ] dr for an
// ambient-scale profile; composite Simpson with step <= eps/steps_per_eps.
// Exact zero when radius <= 0.
double line_energy(const std::function<double(double)>& value,
                   const std::function<double(double)>& slope, double radius, Epsilon eps,
                   int steps_per_eps = 100);

// sup-norm of hbar'' - W'(hbar) and of its first two (finite-difference)
// derivatives over a fine sampling, in units of eps^3. Reported, not
// asserted: the scaling constant is left unquantified upstream.
struct TruncationResidual {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

TruncationResidual truncation_residual(const Profile1D& hbar_unit, Epsilon eps);

}  // namespace ac
