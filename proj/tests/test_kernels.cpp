#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <vector>

#include "ac/kernels.hpp"
#include "ac/metric.hpp"
#include "ac/parallel.hpp"
#include "ac/potential.hpp"
#include "doctest.h"

using ac::Potential;
namespace K = ac::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

double fd_second(double (*f)(double), double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

TEST_CASE("potential: values and joints") {
  CHECK(Potential::w(1.0) == 0.0);
  CHECK(Potential::w(-1.0) == 0.0);
  CHECK(Potential::w(0.0) == doctest::Approx(0.25));
  CHECK(Potential::dw(1.0) == doctest::Approx(0.0));
  CHECK(Potential::dw(-1.0) == doctest::Approx(0.0));
  CHECK(Potential::d2w(1.0) == doctest::Approx(2.0));
  CHECK(Potential::d2w(-1.0) == doctest::Approx(2.0));

  // C^2 joints at |u| = 2 and |u| = 2.5.
  for (double s : {-1.0, 1.0}) {
    for (double j : {2.0, 2.5}) {
      const double x = s * j, e = 1e-7;
      CHECK(Potential::w(x + e) - Potential::w(x - e) ==
            doctest::Approx(2.0 * e * Potential::dw(x)).epsilon(1e-6));
      CHECK(Potential::dw(x + e) - Potential::dw(x - e) ==
            doctest::Approx(2.0 * e * Potential::d2w(x)).epsilon(1e-6));
      const double d2l = fd_second(Potential::w, x - 10.0 * e, 1e-5);
      const double d2r = fd_second(Potential::w, x + 10.0 * e, 1e-5);
      CHECK(d2l == doctest::Approx(d2r).epsilon(1e-3));
    }
  }

  // Consistency of dw, d2w with finite differences of w in all regions.
  for (double x : {-3.1, -2.3, -1.2, -0.4, 0.0, 0.7, 1.6, 2.2, 2.4, 2.8, 4.0}) {
    const double h = 1e-6;
    CHECK((Potential::w(x + h) - Potential::w(x - h)) / (2.0 * h) ==
          doctest::Approx(Potential::dw(x)).epsilon(1e-7));
    CHECK(fd_second(Potential::w, x, 1e-4) == doctest::Approx(Potential::d2w(x)).epsilon(1e-5));
  }

  // Quadratic growth far out, nonnegativity, evenness.
  CHECK(Potential::d2w(3.0) == doctest::Approx(2.0));
  CHECK(Potential::d2w(50.0) == doctest::Approx(2.0));
  for (double x = -6.0; x <= 6.0; x += 0.01) {
    CHECK(Potential::w(x) >= 0.0);
    CHECK(Potential::w(x) == doctest::Approx(Potential::w(-x)).epsilon(1e-14));
  }
}

TEST_CASE("potential: sigma and phi") {
  CHECK(ac::sigma_constant() == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-15));
  CHECK(ac::sigma_quadrature(2000) == doctest::Approx(ac::sigma_constant()).epsilon(1e-9));

  CHECK(Potential::phi(1.0) - Potential::phi(-1.0) ==
        doctest::Approx(ac::sigma_constant()).epsilon(1e-14));
  CHECK(Potential::phi(0.0) == doctest::Approx(0.0));
  // (sqrt(W) has a corner at the wells, so x = +-1 is excluded from the
  // finite-difference sweep.)
  for (double x : {-2.6, -1.7, -0.9, 0.3, 0.99, 1.4, 2.1, 3.0}) {
    const double h = 1e-6;
    CHECK((Potential::phi(x + h) - Potential::phi(x - h)) / (2.0 * h) ==
          doctest::Approx(Potential::sqrt_w_half(x)).epsilon(1e-7));
    CHECK(Potential::phi(x) == doctest::Approx(-Potential::phi(-x)).epsilon(1e-14));
  }
}

TEST_CASE("kernels: selected implementation matches scalar") {
  const K::Ops& sc = K::scalar_ops();
  const K::Ops& sel = K::ops();
  INFO("selected kernels: ", sel.name);

  for (std::size_t n : {1u, 5u, 37u, 256u}) {
    auto x = random_vec(n, -3.0, 3.0, 11 + static_cast<unsigned>(n));
    auto y = random_vec(n, -3.0, 3.0, 23 + static_cast<unsigned>(n));
    auto w = random_vec(n, 0.1, 2.0, 31 + static_cast<unsigned>(n));

    auto y1 = y, y2 = y;
    sc.axpy(y1.data(), 0.37, x.data(), n);
    sel.axpy(y2.data(), 0.37, x.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    CHECK(sc.dot_w(x.data(), y.data(), w.data(), n) ==
          doctest::Approx(sel.dot_w(x.data(), y.data(), w.data(), n)).epsilon(1e-13));
    CHECK(sc.sum_w(x.data(), w.data(), n) ==
          doctest::Approx(sel.sum_w(x.data(), w.data(), n)).epsilon(1e-13));

    std::vector<double> a1(n), a2(n);
    sc.w_batch(x.data(), a1.data(), n);
    sel.w_batch(x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-14));
    sc.dw_batch(x.data(), a1.data(), n);
    sel.dw_batch(x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-14));
    sc.d2w_batch(x.data(), a1.data(), n);
    sel.d2w_batch(x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-14));
  }

  for (std::size_t n : {3u, 8u, 37u, 128u}) {
    auto um = random_vec(n, -1.0, 1.0, 41);
    auto u0 = random_vec(n, -1.0, 1.0, 43);
    auto up = random_vec(n, -1.0, 1.0, 47);
    auto ce = random_vec(n, 0.2, 2.0, 53);
    auto cw = random_vec(n, 0.2, 2.0, 59);
    auto cn = random_vec(n, 0.2, 2.0, 61);
    auto cs = random_vec(n, 0.2, 2.0, 67);
    auto iv = random_vec(n, 0.2, 2.0, 71);
    std::vector<double> o1(n), o2(n);
    sc.lap_row(um.data(), u0.data(), up.data(), ce.data(), cw.data(), cn.data(), cs.data(),
               iv.data(), 0.4, -0.2, o1.data(), n);
    sel.lap_row(um.data(), u0.data(), up.data(), ce.data(), cw.data(), cn.data(), cs.data(),
                iv.data(), 0.4, -0.2, o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-13));
  }
}

TEST_CASE("metric: flat and neck caches") {
  ac::Grid g({32, 64}, {10.0, 8.0});
  ac::Metric flat = ac::Metric::flat(g);
  CHECK(flat.volume == doctest::Approx(80.0).epsilon(1e-13));
  CHECK(flat.rho_min == 1.0);
  CHECK(flat.y_profile);

  ac::Metric nk = ac::Metric::neck(g, 0.5, 4.0);
  CHECK(nk.rho_max == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(nk.rho_min == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(nk.y_profile);
  CHECK(nk.rho_at_y(0.0) == doctest::Approx(1.5));
  CHECK(nk.rho_at_y(2.0) == doctest::Approx(0.5));
  // volume = Lx * integral of rho^2 = Lx * Ly * (1 + a^2/2)
  CHECK(nk.volume == doctest::Approx(10.0 * 8.0 * (1.0 + 0.125)).epsilon(1e-12));

  // fm is fp shifted by one node along the axis.
  for (int a = 0; a < 2; ++a) {
    for (int i = 0; i < g.dims[0]; ++i)
      for (int j = 0; j < g.dims[1]; ++j) {
        const std::size_t here = g.index(i, j);
        const std::size_t prev = a == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
        CHECK(nk.fm[a][here] == nk.fp[a][prev]);
      }
  }

  // x-dependent factor is not a profile metric
  ac::Field r(g.size, 1.0);
  for (int i = 0; i < g.dims[0]; ++i)
    for (int j = 0; j < g.dims[1]; ++j) r[g.index(i, j)] = 1.0 + 0.1 * std::sin(g.coord(i, 0));
  CHECK_FALSE(ac::Metric::from_rho(g, r).y_profile);

  CHECK_THROWS(ac::Metric::neck(g, 1.5, 4.0));
  CHECK_THROWS(ac::Metric::neck(g, 0.5, 3.0));
}

TEST_CASE("parallel worker pool: coverage, env clamp, exception transport") {
  setenv("AC_MINMAX_THREADS", "4", 1);
  CHECK(ac::thread_budget() == 4);

  std::vector<int> hits(257, 0);
  ac::parallel_for(hits.size(), [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) CHECK(h == 1);

  CHECK_THROWS_AS(ac::parallel_for(64,
                                   [](std::size_t k) {
                                     if (k == 13) throw std::runtime_error("boom");
                                   }),
                  std::runtime_error);

  setenv("AC_MINMAX_THREADS", "900", 1);
  CHECK(ac::thread_budget() == 64);
  setenv("AC_MINMAX_THREADS", "junk", 1);
  CHECK(ac::thread_budget() >= 1);
  unsetenv("AC_MINMAX_THREADS");
  CHECK(ac::thread_budget() >= 1);

  ac::parallel_for(0, [](std::size_t) { throw std::runtime_error("never"); });
}
