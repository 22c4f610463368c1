#pragma once

#include <vector>

#include "ac/energy.hpp"

namespace ac {

// Lowest eigenpairs of the linearization L phi = -eps lap_g phi +
// (W''(u)/eps) phi, self-adjoint in L^2(dvol); inner(phi, L phi) equals
// second_variation(u, phi).
struct SpectralReport {
  double epsilon = 0.0;
  double tol = 0.0;                 // eigenvalue classification tolerance
  std::vector<double> eigenvalues;  // ascending
  std::vector<Field> eigenvectors;  // volume-orthonormal
  int morse_index = 0;              // # eigenvalues < -tol
  int nullity = 0;                  // # |eigenvalue| <= tol
  bool strictly_stable = false;     // smallest eigenvalue > tol
  int iterations = 0;
  bool converged = false;
};

// Block preconditioned inverse-free iteration (locally optimal subspace),
// deterministic start. k in [1, 10].
SpectralReport spectrum(const Metric& m, const Field& u, Epsilon eps, int k,
                        double tol_res = 1e-9, int max_iter = 800);

// Applies L once (shared with the solver; exposed for residual checks).
void linearized_apply(const Metric& m, const Field& d2w_over_eps, Epsilon eps, const Field& phi,
                      Field& out);

}  // namespace ac
