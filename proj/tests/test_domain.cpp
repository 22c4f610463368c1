#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "ac/operators.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ac;

namespace {

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field f(g.size);
  for (auto& x : f) x = dist(rng);
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void check_sbp(const Metric& m, unsigned seed) {
  Field u = random_field(m.grid, seed);
  Field v = random_field(m.grid, seed + 1);
  Field lap;
  laplace_beltrami(m, u, lap);
  Field prod(m.grid.size);
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = v[i] * lap[i];
  const double lhs = integrate(m, prod);
  const double rhs = -dirichlet_form(m, u, v);
  CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
  CHECK(dirichlet_form(m, u, v) == dirichlet_form(m, v, u));
  CHECK(dirichlet_form(m, u, u) >= 0.0);
}

}  // namespace

TEST_CASE("grid: indexing, wrap, validation") {
  Grid g({16, 8}, {4.0, 2.0});
  CHECK(g.size == 128);
  CHECK(g.h[0] == doctest::Approx(0.25));
  CHECK(g.cell_volume() == doctest::Approx(0.0625));
  CHECK(g.index(0, 0) == 0);
  CHECK(g.index(-1, 0) == 15);
  CHECK(g.index(16, 0) == 0);
  CHECK(g.index(3, -1) == g.index(3, 7));
  CHECK(g.coord(17, 0) == doctest::Approx(17 * 0.25));

  CHECK(g.wrap_delta(3.9, 0.1, 0) == doctest::Approx(-0.2));
  CHECK(g.wrap_delta(0.1, 3.9, 0) == doctest::Approx(0.2));
  CHECK(g.wrap_delta(1.0, 2.0, 0) == doctest::Approx(-1.0));

  CHECK_THROWS(Grid({4, 16}, {1.0, 1.0}));
  CHECK_THROWS(Grid({16, 16}, {0.0, 1.0}));
  Field wrong(64);
  CHECK_THROWS(check_shape(g, wrong, "test"));
}

TEST_CASE("operators: summation by parts is exact") {
  // 1d varying metric
  {
    Grid g({64}, {3.0});
    Field r(g.size);
    for (int i = 0; i < 64; ++i) r[i] = 1.0 + 0.4 * std::sin(2.0 * M_PI * g.coord(i, 0) / 3.0);
    check_sbp(Metric::from_rho(g, r), 101);
  }
  // 2d flat, neck, and x-dependent custom
  {
    Grid g({24, 16}, {5.0, 4.0});
    check_sbp(Metric::flat(g), 202);
    check_sbp(Metric::neck(g, 0.5, 2.0), 203);
    Field r(g.size);
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 16; ++j)
        r[g.index(i, j)] = 1.2 + 0.3 * std::cos(2.0 * M_PI * g.coord(i, 0) / 5.0) *
                                     std::sin(2.0 * M_PI * g.coord(j, 1) / 4.0);
    check_sbp(Metric::from_rho(g, r), 204);
  }
  // 3d custom
  {
    Grid g({8, 12, 16}, {2.0, 3.0, 4.0});
    Field r(g.size);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 12; ++j)
        for (int k = 0; k < 16; ++k)
          r[g.index(i, j, k)] = 1.0 + 0.2 * std::sin(M_PI * g.coord(i, 0)) +
                                0.1 * std::cos(M_PI * g.coord(k, 2) / 2.0);
    check_sbp(Metric::from_rho(g, r), 305);
  }
}

TEST_CASE("laplace_beltrami: second-order convergence, d=2 conformal") {
  const double Lx = 4.0, Ly = 6.0;
  auto error_at = [&](int nx, int ny) {
    Grid g({nx, ny}, {Lx, Ly});
    Metric m = Metric::neck(g, 0.5, 3.0);
    Field u(g.size), expect(g.size);
    const double kx = 2.0 * M_PI / Lx, ky = 4.0 * M_PI / Ly;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const double x = g.coord(i, 0), y = g.coord(j, 1);
        const double val = std::sin(kx * x) * std::cos(ky * y);
        u[g.index(i, j)] = val;
        const double rho = m.rho_at_y(y);
        expect[g.index(i, j)] = -(kx * kx + ky * ky) * val / (rho * rho);
      }
    Field lap;
    laplace_beltrami(m, u, lap);
    return max_abs_diff(lap, expect);
  };
  const double e1 = error_at(32, 48), e2 = error_at(64, 96);
  const double ratio = e1 / e2;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("laplace_beltrami: second-order convergence, d=1 and d=3") {
  // d=1: rho^{-1} (rho^{-1} u')' = rho^{-2} u'' - rho^{-3} rho' u'
  auto err1 = [&](int n) {
    const double L = 3.0;
    Grid g({n}, {L});
    const double kr = 2.0 * M_PI / L, ku = 4.0 * M_PI / L;
    Field r(g.size);
    for (int i = 0; i < n; ++i) r[i] = 1.0 + 0.4 * std::sin(kr * g.coord(i, 0));
    Metric m = Metric::from_rho(g, r);
    Field u(g.size), expect(g.size);
    for (int i = 0; i < n; ++i) {
      const double x = g.coord(i, 0);
      const double rho = 1.0 + 0.4 * std::sin(kr * x), drho = 0.4 * kr * std::cos(kr * x);
      u[i] = std::cos(ku * x);
      expect[i] = -ku * ku * std::cos(ku * x) / (rho * rho) +
                  ku * std::sin(ku * x) * drho / (rho * rho * rho);
    }
    Field lap;
    laplace_beltrami(m, u, lap);
    return max_abs_diff(lap, expect);
  };
  const double r1 = err1(64) / err1(128);
  CHECK(r1 >= 3.5);
  CHECK(r1 <= 4.5);

  // d=3: rho(z) only: rho^{-3} div(rho grad u) = rho^{-2} lap u + rho^{-3} rho' u_z
  auto err3 = [&](int n) {
    const double L = 2.0;
    Grid g({n, n, n}, {L, L, L});
    const double k = 2.0 * M_PI / L;
    Field r(g.size);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk)
          r[g.index(i, j, kk)] = 1.0 + 0.3 * std::cos(k * g.coord(kk, 2));
    Metric m = Metric::from_rho(g, r);
    CHECK(m.y_profile);
    Field u(g.size), expect(g.size);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk) {
          const double x = g.coord(i, 0), y = g.coord(j, 1), z = g.coord(kk, 2);
          const double rho = 1.0 + 0.3 * std::cos(k * z), drho = -0.3 * k * std::sin(k * z);
          u[g.index(i, j, kk)] = std::sin(k * x) * std::cos(k * y) * std::cos(k * z);
          const double lap_flat = -3.0 * k * k * u[g.index(i, j, kk)];
          const double uz = -k * std::sin(k * x) * std::cos(k * y) * std::sin(k * z);
          expect[g.index(i, j, kk)] =
              lap_flat / (rho * rho) + drho * uz / (rho * rho * rho);
        }
    Field lap;
    laplace_beltrami(m, u, lap);
    return max_abs_diff(lap, expect);
  };
  const double r3 = err3(16) / err3(32);
  CHECK(r3 >= 3.5);
  CHECK(r3 <= 4.5);
}

TEST_CASE("gradient_field: convergence and metric norm") {
  const double Lx = 4.0, Ly = 6.0;
  auto error_at = [&](int nx, int ny) {
    Grid g({nx, ny}, {Lx, Ly});
    Metric m = Metric::neck(g, 0.5, 3.0);
    Field u(g.size);
    const double kx = 2.0 * M_PI / Lx, ky = 4.0 * M_PI / Ly;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        u[g.index(i, j)] = std::sin(kx * g.coord(i, 0)) * std::cos(ky * g.coord(j, 1));
    auto comp = gradient_field(m, u);
    REQUIRE(comp.size() == 2);
    double err = 0.0;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const double x = g.coord(i, 0), y = g.coord(j, 1);
        const double rho = m.rho_at_y(y);
        const double gx = kx * std::cos(kx * x) * std::cos(ky * y) / rho;
        const double gy = -ky * std::sin(kx * x) * std::sin(ky * y) / rho;
        err = std::max(err, std::fabs(comp[0][g.index(i, j)] - gx));
        err = std::max(err, std::fabs(comp[1][g.index(i, j)] - gy));
      }
    return err;
  };
  const double ratio = error_at(32, 48) / error_at(64, 96);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);

  Grid g({64, 96}, {Lx, Ly});
  Metric m = Metric::neck(g, 0.5, 3.0);
  Field u(g.size);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 96; ++j)
      u[g.index(i, j)] = std::sin(2.0 * M_PI * g.coord(i, 0) / Lx);
  Field n2 = grad_norm2(m, u);
  auto comp = gradient_field(m, u);
  for (std::size_t i = 0; i < n2.size(); ++i)
    CHECK(n2[i] == doctest::Approx(comp[0][i] * comp[0][i] + comp[1][i] * comp[1][i]));
}

TEST_CASE("integrate: spectral accuracy for smooth periodic data") {
  Grid g({32, 64}, {10.0, 8.0});
  Metric flat = Metric::flat(g);
  Field s2(g.size);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 64; ++j) {
      const double v = std::sin(2.0 * M_PI * g.coord(i, 0) / 10.0);
      s2[g.index(i, j)] = v * v;
    }
  CHECK(integrate(flat, s2) == doctest::Approx(40.0).epsilon(1e-13));

  Metric nk = Metric::neck(g, 0.5, 4.0);
  // int rho^2 sin^2 dx dy = (Lx/2) * Ly * (1 + a^2/2)
  CHECK(integrate(nk, s2) == doctest::Approx(5.0 * 8.0 * 1.125).epsilon(1e-12));
  Field one(g.size, 1.0);
  CHECK(integrate(nk, one) == doctest::Approx(nk.volume).epsilon(1e-14));
}

TEST_CASE("dirichlet_form: matches the analytic Dirichlet energy") {
  const double Lx = 4.0, Ly = 6.0;
  Grid g({96, 144}, {Lx, Ly});
  Metric m = Metric::neck(g, 0.5, 3.0);
  Field u(g.size);
  const double kx = 2.0 * M_PI / Lx;
  for (int i = 0; i < 96; ++i)
    for (int j = 0; j < 144; ++j) u[g.index(i, j)] = std::sin(kx * g.coord(i, 0));
  // d=2: int |grad u|_g^2 dvol = int |grad u|^2 dx = kx^2 Lx Ly / 2
  CHECK(dirichlet_form(m, u, u) == doctest::Approx(kx * kx * Lx * Ly / 2.0).epsilon(2e-3));

  Field c(g.size, 3.7);
  Field lap;
  laplace_beltrami(m, c, lap);
  for (double v : lap) CHECK(v == 0.0);
  CHECK(dirichlet_form(m, c, u) == 0.0);
}
