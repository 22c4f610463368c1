#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ac {

using Field = std::vector<double>;

// Periodic rectangular lattice. Axis d-1 is the "vertical" axis used by the
// graph/hypersurface machinery; all axes wrap.
struct Grid {
  int d = 0;
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::size_t size = 0;

  Grid() = default;
  Grid(std::initializer_list<int> ds, std::initializer_list<double> ls) {
    init(std::vector<int>(ds), std::vector<double>(ls));
  }
  Grid(const std::vector<int>& ds, const std::vector<double>& ls) { init(ds, ls); }

  void init(const std::vector<int>& ds, const std::vector<double>& ls) {
    if (ds.empty() || ds.size() > 3 || ds.size() != ls.size())
      throw std::invalid_argument("grid: need 1..3 matching dims/lengths");
    d = static_cast<int>(ds.size());
    size = 1;
    for (int a = 0; a < d; ++a) {
      if (ds[a] < 8) throw std::invalid_argument("grid: all dims must be >= 8");
      if (!(ls[a] > 0)) throw std::invalid_argument("grid: lengths must be positive");
      dims[a] = ds[a];
      lengths[a] = ls[a];
      h[a] = ls[a] / ds[a];
      size *= static_cast<std::size_t>(ds[a]);
    }
    stride[0] = 1;
    for (int a = 1; a < 3; ++a) stride[a] = stride[a - 1] * static_cast<std::size_t>(dims[a - 1]);
  }

  int wrap(int i, int axis) const {
    int n = dims[axis];
    i %= n;
    return i < 0 ? i + n : i;
  }
  std::size_t index(int i, int j = 0, int k = 0) const {
    return static_cast<std::size_t>(wrap(i, 0)) +
           stride[1] * static_cast<std::size_t>(wrap(j, 1)) +
           stride[2] * static_cast<std::size_t>(wrap(k, 2));
  }
  // Coordinate of node i along axis (cell-centered at i*h).
  double coord(int i, int axis) const { return h[axis] * i; }
  double cell_volume() const {
    double v = 1;
    for (int a = 0; a < d; ++a) v *= h[a];
    return v;
  }
  bool same_shape(const Field& f) const { return f.size() == size; }
  Field make_field(double fill = 0.0) const { return Field(size, fill); }

  // Shortest periodic displacement a-b along axis.
  double wrap_delta(double a, double b, int axis) const {
    double L = lengths[axis];
    double t = a - b;
    t -= L * std::intptr_t(t / L + (t >= 0 ? 0.5 : -0.5));
    return t;
  }
};

inline void check_shape(const Grid& g, const Field& f, const char* who) {
  if (!g.same_shape(f)) throw std::invalid_argument(std::string(who) + ": field shape mismatch");
}

}  // namespace ac
