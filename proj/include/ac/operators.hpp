#pragma once

#include <vector>

#include "ac/metric.hpp"

namespace ac {

// Laplace-Beltrami in flux form: rho^{-d} div(rho^{d-2} grad u) with face
// coefficients averaged between adjacent nodes. Exact summation-by-parts
// partner of dirichlet_form: integrate(v * laplace_beltrami(u)) ==
// -dirichlet_form(u, v) in exact arithmetic.
void laplace_beltrami(const Metric& m, const Field& u, Field& out);

// Bilinear form int <grad u, grad v>_g dvol discretized on faces,
// positive semidefinite in u = v.
double dirichlet_form(const Metric& m, const Field& u, const Field& v);

// Gradient components in the orthonormal frame of g (central differences
// scaled by rho^{-1}); the squared metric norm is the component sum of
// squares.
std::vector<Field> gradient_field(const Metric& m, const Field& u);
Field grad_norm2(const Metric& m, const Field& u);

// Quadrature against the metric volume element.
double integrate(const Metric& m, const Field& f);
// L^2(dvol) inner product and norm.
double inner(const Metric& m, const Field& a, const Field& b);
double norm_l2(const Metric& m, const Field& a);

}  // namespace ac
