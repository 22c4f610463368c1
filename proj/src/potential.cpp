#include "ac/potential.hpp"

namespace ac {

double sigma_constant() { return std::sqrt(2.0) / 3.0; }

double sigma_quadrature(int m) {
  // composite Simpson on [-1,1]
  double h = 2.0 / m;
  double s = Potential::sqrt_w_half(-1.0) + Potential::sqrt_w_half(1.0);
  for (int i = 1; i < m; ++i)
    s += (i % 2 ? 4.0 : 2.0) * Potential::sqrt_w_half(-1.0 + i * h);
  return s * h / 3.0;
}

}  // namespace ac
