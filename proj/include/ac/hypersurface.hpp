#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "ac/metric.hpp"

namespace ac {

// Graph hypersurface over the distinguished level {x_{d-1} = level}: base
// node i carries the coordinate height level + phi[i], and the orientation
// normal points toward increasing height. omega bounds |phi| (coordinate
// units); violating it is a domain error at evaluation time.
struct Hypersurface {
  Grid base;      // the (d-1)-dimensional lattice under the graph
  Grid ambient;   // d >= 2
  double level = 0.0;
  Field phi;      // coordinate heights, base.size entries
  double omega = std::numeric_limits<double>::infinity();

  // Ambient node (base column i, vertical row j).
  std::size_t column(std::size_t i, int j) const {
    return i + static_cast<std::size_t>(ambient.wrap(j, ambient.d - 1)) * base.size;
  }
};

Hypersurface make_surface(const Grid& ambient, double level, Field phi, double omega);
Hypersurface level_surface(const Grid& ambient, double level, double omega);

// Conformal factor at base column col, vertical coordinate y: closed form
// when rho depends only on the vertical axis, periodic linear interpolation
// up the column otherwise.
double rho_at(const Metric& m, std::size_t col, double y);

// Cached cumulative vertical arclength s = F(y) for y-profile metrics:
// composite Simpson on 16 sub-samples per cell, F(0) = 0, F(L) = period.
struct VerticalTable {
  double L = 0.0;
  double period = 0.0;
  double step = 0.0;
  std::vector<double> F;  // F[k] at y = k * step, k = 0..m
  const Metric* metric = nullptr;

  double cumulative(double y) const;          // winding-aware F
  double length(double y0, double y1) const;  // signed, F(y1) - F(y0)
  double invert(double y0, double s) const;   // y with length(y0, y) = s
};

VerticalTable vertical_table(const Metric& m);

// Metric length of the vertical segment from y0 to y1 (either may leave the
// fundamental interval; the integrand is periodic). Exact for the piecewise
// linear interpolation of tabulated factors, Simpson otherwise.
double vertical_length(const Metric& m, std::size_t col, double y0, double y1);
// Full metric length of the vertical circle through column col.
double vertical_period(const Metric& m, std::size_t col);
// Solve vertical_length(col, level, y) = s for y; s of either sign.
double vertical_height_to_coord(const Metric& m, std::size_t col, double level, double s);

// Graph at *metric* normal height s[i] over the level line, converted per
// column to coordinate heights.
Hypersurface metric_graph(const Grid& ambient, const Metric& m, double level, const Field& s,
                          double omega);

// Hausdorff measure of the graph: quadrature of rho^{d-1} sqrt(1 + |grad
// phi|^2) over the base, centered differences with heights compared modulo
// the vertical period. Exact for flat horizontal graphs. The node terms are
// sorted before summation, so relabelling the base changes nothing.
double area(const Hypersurface& S, const Metric& m);

// Same quadrature over the base columns with keep[i] != 0.
double area_masked(const Hypersurface& S, const Metric& m, const std::vector<std::uint8_t>& keep);

}  // namespace ac
