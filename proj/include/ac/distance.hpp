#pragma once

#include <vector>

#include "ac/hypersurface.hpp"

namespace ac {

// Signed metric distance to a graph: negative below, positive above (wrapped
// height offset decides the side), |grad dist|_g = 1 away from the cut locus.
struct SignedDistanceField {
  Field dist;
  double band = 0.0;            // half-width with guaranteed accuracy
  bool exact_vertical = false;  // column integrals instead of marching
};

// First-order fast marching with slowness rho, seeded on the two rows
// bracketing the graph in every column. For vertical-profile metrics under a
// numerically constant height field the column integral is exact and replaces
// the march. The graph must clear the vertical cut locus:
// max |phi| <= L_vertical / 2 - 2 h_vertical.
SignedDistanceField signed_distance(const Hypersurface& S, const Metric& m);

// max over { |dist| <= band } of | |grad dist|_g - 1 |, centered differences.
double eikonal_residual(const Metric& m, const Field& dist, double band);

// Samples of H = -lap_g dist on { dist = level }: every lattice edge crossing
// the level contributes its linear interpolation. Throws when the level set
// is empty.
std::vector<double> level_set_mean_curvature(const Metric& m, const Field& dist, double level);

}  // namespace ac
