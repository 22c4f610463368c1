#pragma once

#include <array>
#include <string>

#include "ac/grid.hpp"

namespace ac {

// Conformal metric g = rho^2 * (euclidean) on a periodic grid.
//
// Cached node fields:
//   vol       rho^d * cell_volume   (quadrature weight)
//   inv_rho_d rho^{-d}
//   inv_rho2  rho^{-2}
//   fp[a]     face coefficient between node i and i+e_a, already divided
//             by h_a^2: (rho^{d-2}(i) + rho^{d-2}(i+e_a)) / (2 h_a^2)
//   fm[a]     same, between i-e_a and i (fp shifted by one, wrapped)
struct Metric {
  enum class Family { Flat, Neck, Custom };

  Grid grid;
  Field rho;
  Field vol;
  Field inv_rho_d;
  Field inv_rho2;
  std::array<Field, 3> fp;
  std::array<Field, 3> fm;

  double rho_min = 1.0;
  double rho_max = 1.0;
  double volume = 0.0;
  bool y_profile = false;  // rho depends only on the last axis

  Family family = Family::Flat;
  double amplitude = 0.0;
  double wavelength = 1.0;

  static Metric flat(const Grid& g);
  static Metric neck(const Grid& g, double amplitude, double wavelength);
  static Metric from_rho(const Grid& g, Field rho_values);
  static Metric from_table(const Grid& g, const std::string& csv_path);

  // Conformal factor along the last axis. Closed form for Flat/Neck,
  // periodic linear interpolation of the nodal column otherwise
  // (meaningful when y_profile).
  double rho_at_y(double y) const;

  int height_axis() const { return grid.d - 1; }
};

}  // namespace ac
