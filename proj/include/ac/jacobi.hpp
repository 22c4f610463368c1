#pragma once

#include "ac/hypersurface.hpp"

namespace ac {

// Second-variation data of a curve section M = graph(phi) in a conformal
// surface: q = |A|^2 + Ric(nu, nu) restricted to M, ell the induced length
// weight (dvol_M = ell h), and the first eigenpair of L f = Delta_M f + q f
// with the sign convention lambda > 0 <=> M unstable. The ground state eta
// is positive with int_M eta^2 dvol = 1.
struct JacobiData {
  double lambda = 0.0;
  Field eta;
  Field q;
  Field ell;
  Field kappa;  // signed geodesic curvature (the mean curvature for n = 1)
  double eta_min = 0.0;
  double eta_max = 0.0;
  double h = 0.0;  // base spacing
  int iterations = 0;
};

// q, ell and optionally kappa without the eigensolve. Only curve sections are
// supported (ambient d = 2); higher dimensions are a domain error.
void jacobi_assemble(const Hypersurface& S, const Metric& m, Field& q, Field& ell,
                     Field* kappa = nullptr);

JacobiData jacobi_first_eigenpair(const Hypersurface& S, const Metric& m);

// Index form int_M |grad f|^2 - q f^2 dvol of the section.
double jacobi_quadratic_form(const JacobiData& jd, const Field& f);

}  // namespace ac
