#pragma once

#include "ac/epsilon.hpp"
#include "ac/metric.hpp"

namespace ac {

// E(u) = (1/2 sigma) int [ eps |grad u|^2_g / 2 + W(u)/eps ] dvol, with the
// normalization sigma = int_{-1}^{1} sqrt(W/2) chosen so a unit-density
// interface carries unit energy per unit area.
struct EnergyReport {
  double epsilon = 0.0;
  double sigma = 0.0;
  double gradient_term = 0.0;         // (1/2 sigma) (eps/2) int |grad u|^2_g
  double potential_term = 0.0;        // (1/2 sigma) (1/eps) int W(u)
  double total = 0.0;
  double equipartition_defect = 0.0;  // |gradient - potential| / max(total, 1e-300)
};

EnergyReport energy(const Metric& m, const Field& u, Epsilon eps);

// eps lap_g u - W'(u)/eps; the negative L^2(dvol) gradient of 2 sigma E, so
// dE(u)[v] = -(1/2 sigma) inner(first_variation(u), v).
Field first_variation(const Metric& m, const Field& u, Epsilon eps);

// Quadratic form int [ eps |grad phi|^2_g + (W''(u)/eps) phi^2 ] dvol.
double second_variation(const Metric& m, const Field& u, const Field& phi, Epsilon eps);

// Tilted functional F(u) = E(u) - (mu / 2 sigma) int u dvol and its
// first variation eps lap_g u - W'(u)/eps + mu (same normalization as above).
double perturbed_functional(const Metric& m, const Field& u, Epsilon eps, double mu);
Field perturbed_first_variation(const Metric& m, const Field& u, Epsilon eps, double mu);

}  // namespace ac
