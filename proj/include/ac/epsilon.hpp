#pragma once

#include <cmath>
#include <stdexcept>

namespace ac {

// Interface-width parameter. The admissible range (0, 1/e) keeps |log eps|
// bounded away from zero, so truncation radii below are well defined.
struct Epsilon {
  double value;

  explicit Epsilon(double v) : value(v) {
    if (!(v > 0.0) || !(v < 1.0 / M_E))
      throw std::invalid_argument("epsilon must lie in (0, 1/e)");
  }

  // Truncation half-width in profile units: Lambda = 3 |log eps|.
  double lambda() const { return 3.0 * std::fabs(std::log(value)); }
  // Profile support radius in ambient units.
  double support_radius() const { return 2.0 * value * lambda(); }
};

}  // namespace ac
