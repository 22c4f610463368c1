#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ac/calibrate.hpp"
#include "ac/double_cover.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ac;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

double ring_gap(double a, double b, double period) {
  double d = std::fmod(std::fabs(a - b), period);
  return std::min(d, period - d);
}

// One lab fixture shared by the calibration cases: the standard neck at
// 256^2, its waist section, spectral data and calibrated constants.
struct NeckLab {
  Grid g;
  Metric m;
  Hypersurface S;
  JacobiData jd;
  UnstableRegion ur;
  CalibratedConstants cc;
  CalibrationReport rep;
};

const NeckLab& neck_lab() {
  static const NeckLab* lab = [] {
    auto* L = new NeckLab();
    L->g = Grid({256, 256}, {100.0, 80.0});
    L->m = Metric::neck(L->g, 0.5, 40.0);
    L->S = level_surface(L->g, 0.0, 40.0);
    L->jd = jacobi_first_eigenpair(L->S, L->m);
    L->ur = unstable_region(L->S, L->m, L->jd);
    L->cc = calibrate_constants(L->S, L->m, L->ur, L->jd, 150.0, &L->rep);
    return L;
  }();
  return *lab;
}

}  // namespace

TEST_CASE("flat horizontal graphs measure exactly") {
  Grid g({32, 32}, {2.0, 1.0});
  const Hypersurface S = level_surface(g, 0.3, 0.4);
  CHECK(area(S, Metric::flat(g)) == 2.0);

  Field rho(g.size, 1.7);
  CHECK(area(S, Metric::from_rho(g, rho)) == doctest::Approx(3.4).epsilon(1e-14));
}

TEST_CASE("tilted planes with integer winding carry their exact measure") {
  // phi = x/2 rises by exactly one vertical period across the domain, so the
  // centered slope is 1/2 at every column including the seam.
  Grid g2({64, 64}, {2.0, 1.0});
  Field phi(64);
  for (int i = 0; i < 64; ++i) phi[i] = 0.5 * g2.coord(i, 0);
  const double len = area(make_surface(g2, 0.0, phi, 2.0), Metric::flat(g2));
  CHECK(len == doctest::Approx(2.0 * std::sqrt(1.25)).epsilon(1e-12));

  // d = 3, slopes (1/2, 1): the area factor sqrt(1 + 1/4 + 1) = 3/2 and all
  // node coordinates are dyadic, so the quadrature is exact.
  Grid g3({16, 16, 16}, {2.0, 1.0, 1.0});
  Field phi3(256);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) phi3[i + 16 * j] = 0.5 * g3.coord(i, 0) + g3.coord(j, 1);
  CHECK(area(make_surface(g3, 0.0, phi3, 3.0), Metric::flat(g3)) == 3.0);
}

TEST_CASE("relabelling the base leaves the measure bitwise unchanged") {
  Grid g({64, 64}, {4.0, 4.0});
  const Metric m = Metric::neck(g, 0.3, 4.0);
  Field phi(64), shifted(64);
  for (int i = 0; i < 64; ++i) {
    const double x = g.coord(i, 0);
    phi[i] = 0.5 * std::sin(kTau * x / 4.0) + 0.1 * std::cos(2.0 * kTau * x / 4.0);
  }
  for (int i = 0; i < 64; ++i) shifted[i] = phi[(i + 17) % 64];
  const double a = area(make_surface(g, 1.0, phi, 2.0), m);
  const double b = area(make_surface(g, 1.0, shifted, 2.0), m);
  CHECK(a == b);
}

TEST_CASE("the tubular bound rejects tall graphs") {
  Grid g({32, 32}, {2.0, 1.0});
  const Metric m = Metric::flat(g);
  Field phi(32, 0.3);
  CHECK_THROWS_AS(area(make_surface(g, 0.0, phi, 0.25), m), std::invalid_argument);
  CHECK_NOTHROW(area(make_surface(g, 0.0, phi, 0.35), m));
}

TEST_CASE("curved graph area matches independent quadrature") {
  const NeckLab& lab = neck_lab();
  Field phi(256);
  for (int i = 0; i < 256; ++i) phi[i] = 2.0 * std::sin(kTau * lab.g.coord(i, 0) / 100.0);
  const double got = area(make_surface(lab.g, 3.0, phi, 40.0), lab.m);
  const double want = oracle::simpson(
      [](double x) {
        const double p = 2.0 * std::sin(kTau * x / 100.0);
        const double dp = 2.0 * kTau / 100.0 * std::cos(kTau * x / 100.0);
        return (1.0 + 0.5 * std::cos(kTau * (3.0 + p) / 40.0)) * std::sqrt(1.0 + dp * dp);
      },
      0.0, 100.0, 8192);
  CHECK(got == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("metric graphs round-trip their vertical height") {
  // Perturbed tabulated factor: no vertical profile, so the per-column
  // Newton branch builds the graph.
  Grid g({64, 64}, {20.0, 20.0});
  Field rho(g.size);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      rho[i + 64 * j] = (1.0 + 0.3 * std::cos(kTau * g.coord(j, 1) / 20.0)) *
                        (1.0 + 0.05 * std::cos(kTau * g.coord(i, 0) / 20.0));
  const Metric m = Metric::from_rho(g, rho);
  CHECK_FALSE(m.y_profile);

  Field s(64);
  for (int i = 0; i < 64; ++i) s[i] = 3.0 * std::sin(kTau * i / 64.0) + 1.2;
  const Hypersurface G = metric_graph(g, m, 2.5, s, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double back = vertical_length(m, i, 2.5, 2.5 + G.phi[i]);
    worst = std::max(worst, std::fabs(back - s[i]) / (1.0 + std::fabs(s[i])));
  }
  CHECK(worst <= 1e-10);

  const Hypersurface zero = metric_graph(g, m, 2.5, Field(64, 0.0), 10.0);
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(zero.phi[i]) <= 1e-12);
}

TEST_CASE("vertical arclength inverts across windings") {
  const NeckLab& lab = neck_lab();
  for (double s : {-90.0, -3.0, 0.0, 7.0, 130.0}) {
    const double y = vertical_height_to_coord(lab.m, 0, 3.2, s);
    const double back = oracle::simpson(
        [&](double t) { return 1.0 + 0.5 * std::cos(kTau * t / 40.0); }, 3.2, y, 20000);
    CHECK(back == doctest::Approx(s).epsilon(1e-9).scale(1.0 + std::fabs(s)));
  }
  CHECK(vertical_period(lab.m, 0) == doctest::Approx(80.0).epsilon(1e-11));
  Grid g({32, 32}, {2.0, 1.0});
  CHECK(vertical_period(Metric::flat(g), 0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("flat distance to a horizontal line is the wrapped offset") {
  Grid g({64, 64}, {4.0, 4.0});
  const Metric m = Metric::flat(g);
  const SignedDistanceField sd = signed_distance(level_surface(g, 1.0, 1.5), m);
  CHECK(sd.exact_vertical);
  CHECK(sd.band == doctest::Approx(2.0 - 2.0 * 0.0625).epsilon(1e-12));
  double worst = 0.0;
  for (int j = 0; j < 64; ++j) {
    const double want = g.wrap_delta(g.coord(j, 1), 1.0, 1);
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst, std::fabs(sd.dist[i + 64 * j] - want));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("the marcher stays within the graph-distance corridor") {
  // x-perturbed slowness disables the vertical profile, forcing the marcher;
  // the 8-connected Dijkstra oracle overshoots geodesics by at most
  // sec(pi/8) ~ 1.0824 plus O(h) while the marcher is exact up to O(h).
  Grid g({64, 64}, {20.0, 20.0});
  const double h = 0.3125;
  Field rho(g.size);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      rho[i + 64 * j] = (1.0 + 0.3 * std::cos(kTau * g.coord(j, 1) / 20.0)) *
                        (1.0 + 1e-4 * std::cos(kTau * g.coord(i, 0) / 20.0));
  const Metric m = Metric::from_rho(g, rho);
  const SignedDistanceField sd = signed_distance(level_surface(g, 2.5, 8.0), m);
  CHECK_FALSE(sd.exact_vertical);

  std::vector<std::pair<std::size_t, double>> seeds;
  for (int i = 0; i < 64; ++i) {
    const double x = g.coord(i, 0);
    auto line = [&](double y) {
      return (1.0 + 0.3 * std::cos(kTau * y / 20.0)) * (1.0 + 1e-4 * std::cos(kTau * x / 20.0));
    };
    seeds.push_back({static_cast<std::size_t>(i + 64 * 8), 0.0});
    seeds.push_back({static_cast<std::size_t>(i + 64 * 9),
                     oracle::simpson(line, 2.5, g.coord(9, 1), 64)});
  }
  const std::vector<double> dij = oracle::dijkstra_grid(64, 64, h, h, rho, seeds);

  double upper = 1e30, lower = 1e30, sign_ok = 1.0;
  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      const std::size_t n = i + 64 * j;
      const double a = std::fabs(sd.dist[n]);
      if (a > 5.0) continue;
      upper = std::min(upper, dij[n] + 3.0 * h - a);
      lower = std::min(lower, a - dij[n] / 1.0824 + 3.0 * h);
      if (a > h && sd.dist[n] * g.wrap_delta(g.coord(j, 1), 2.5, 1) < 0.0) sign_ok = -1.0;
    }
  }
  CHECK(upper > 0.0);
  CHECK(lower > 0.0);
  CHECK(sign_ok > 0.0);

  // Exact-profile twin of the same geometry: the residual is pure centered
  // truncation, bounded by h^2 |rho''| / (6 rho_min) with slack.
  const Metric my = Metric::neck(g, 0.3, 20.0);
  const SignedDistanceField se = signed_distance(level_surface(g, 2.5, 8.0), my);
  CHECK(se.exact_vertical);
  CHECK(eikonal_residual(my, se.dist, 0.9 * se.band) <= 2e-3);
}

TEST_CASE("distance needs clearance from the vertical cut locus") {
  Grid g({64, 64}, {4.0, 4.0});
  const Metric m = Metric::flat(g);
  CHECK_THROWS_AS(signed_distance(make_surface(g, 0.0, Field(64, 1.9), 2.0), m),
                  std::invalid_argument);
}

TEST_CASE("circle level sets recover their curvature") {
  Grid g({128, 128}, {8.0, 8.0});
  const Metric m = Metric::flat(g);
  Field dist(g.size);
  for (int j = 0; j < 128; ++j)
    for (int i = 0; i < 128; ++i) {
      const double dx = g.wrap_delta(g.coord(i, 0), 4.0, 0);
      const double dy = g.wrap_delta(g.coord(j, 1), 4.0, 1);
      dist[i + 128 * j] = 1.2 - std::hypot(dx, dy);
    }
  for (double level : {0.0, 0.5}) {
    const double r = 1.2 - level;
    double lo = 1e30, hi = -1e30, mean = 0.0;
    const auto samples = level_set_mean_curvature(m, dist, level);
    for (double v : samples) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mean += v;
    }
    mean /= static_cast<double>(samples.size());
    CHECK(lo >= (1.0 / r) * 0.88);
    CHECK(hi <= (1.0 / r) * 1.12);
    CHECK(mean == doctest::Approx(1.0 / r).epsilon(0.03));
  }
}

TEST_CASE("straight interfaces are exactly flat") {
  // The antipodal seam of the wrapped offset jumps by a full period; the
  // cut-locus filter must drop it, leaving only true zero-curvature samples.
  Grid g({64, 64}, {4.0, 4.0});
  const Metric m = Metric::flat(g);
  Field dist(g.size);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) dist[i + 64 * j] = g.wrap_delta(g.coord(j, 1), 1.0, 1);
  for (double v : level_set_mean_curvature(m, dist, 0.0)) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("tube levels curve like the vertical profile") {
  Grid g({128, 128}, {40.0, 40.0});
  const Metric m = Metric::neck(g, 0.4, 40.0);
  const SignedDistanceField sd = signed_distance(level_surface(g, 0.0, 18.0), m);
  const double k = kTau / 40.0;
  auto rho = [&](double y) { return 1.0 + 0.4 * std::cos(k * y); };
  auto drho = [&](double y) { return -0.4 * k * std::sin(k * y); };
  const double d = oracle::simpson(rho, 0.0, 7.5, 4096);
  const double want = -drho(7.5) / (rho(7.5) * rho(7.5));
  for (double v : level_set_mean_curvature(m, sd.dist, d))
    CHECK(v == doctest::Approx(want).epsilon(5e-3));
  // Below the section the oriented Laplacian flips sign with the profile.
  for (double v : level_set_mean_curvature(m, sd.dist, -d))
    CHECK(v == doctest::Approx(-want).epsilon(5e-3));
}

TEST_CASE("flat sections have a silent stability operator") {
  Grid g({64, 64}, {4.0, 4.0});
  const Metric m = Metric::flat(g);
  const JacobiData jd = jacobi_first_eigenpair(level_surface(g, 1.0, 1.5), m);
  CHECK(std::fabs(jd.lambda) <= 1e-9);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(std::fabs(jd.q[i]) <= 1e-14);
    CHECK(std::fabs(jd.kappa[i]) <= 1e-12);
    CHECK(jd.ell[i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(jd.eta[i] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("only curve sections feed the stability solver") {
  Grid g({16, 16, 16}, {2.0, 1.0, 1.0});
  CHECK_THROWS_AS(jacobi_first_eigenpair(level_surface(g, 0.0, 0.4), Metric::flat(g)),
                  std::invalid_argument);
}

TEST_CASE("the waist ring matches its closed-form instability") {
  const NeckLab& lab = neck_lab();
  const double k = kTau / 40.0;
  const double lam_cf = 0.5 * k * k / (1.5 * 1.5 * 1.5);
  CHECK(lab.jd.lambda == doctest::Approx(lam_cf).epsilon(1e-5));
  CHECK(lab.jd.eta_min == doctest::Approx(1.0 / std::sqrt(150.0)).epsilon(1e-7));
  CHECK(lab.jd.eta_max == doctest::Approx(1.0 / std::sqrt(150.0)).epsilon(1e-7));
  for (std::size_t i = 0; i < 256; i += 37) {
    CHECK(lab.jd.q[i] == doctest::Approx(lam_cf).epsilon(1e-5));
    CHECK(std::fabs(lab.jd.kappa[i]) <= 1e-8);
    CHECK(lab.jd.ell[i] == doctest::Approx(1.5).epsilon(1e-12));
  }
  // The index form of the ground state is minus the eigenvalue.
  CHECK(jacobi_quadratic_form(lab.jd, lab.jd.eta) == doctest::Approx(-lab.jd.lambda).epsilon(1e-6));

  // Dense oracle on the similarity-symmetrized section matrix.
  const int n = 256;
  const double h = lab.jd.h;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n, im = (i + n - 1) % n;
    const double cp = 2.0 / (lab.jd.ell[i] + lab.jd.ell[ip]);
    const double cm = 2.0 / (lab.jd.ell[i] + lab.jd.ell[im]);
    a[static_cast<std::size_t>(i) * n + i] = (cp + cm) / (lab.jd.ell[i] * h * h) - lab.jd.q[i];
    a[static_cast<std::size_t>(i) * n + ip] =
        -cp / (h * h * std::sqrt(lab.jd.ell[i] * lab.jd.ell[ip]));
    a[static_cast<std::size_t>(i) * n + im] =
        -cm / (h * h * std::sqrt(lab.jd.ell[i] * lab.jd.ell[im]));
  }
  const auto eig = oracle::jacobi_eigen(a, n);
  CHECK(lab.jd.lambda == doctest::Approx(-eig.values[0]).epsilon(1e-9).scale(1.0));
  double vec_diff = 0.0;
  const double flip = eig.vectors[0] < 0.0 ? -1.0 : 1.0;
  for (int i = 0; i < n; ++i) {
    const double w = lab.jd.ell[i] * h;
    vec_diff = std::max(vec_diff,
                        std::fabs(flip * eig.vectors[i] / std::sqrt(w) - lab.jd.eta[i]));
  }
  CHECK(vec_diff <= 1e-8);
}

TEST_CASE("off-waist rings feel the conformal tilt") {
  const NeckLab& lab = neck_lab();
  const JacobiData jd = jacobi_first_eigenpair(level_surface(lab.g, 7.5, 40.0), lab.m);
  const double k = kTau / 40.0;
  const double rho = 1.0 + 0.5 * std::cos(k * 7.5);
  const double dr = -0.5 * k * std::sin(k * 7.5);
  const double ddr = -0.5 * k * k * std::cos(k * 7.5);
  const double kappa = dr / (rho * rho);
  const double gauss = (dr * dr - ddr * rho) / (rho * rho * rho * rho);
  const double q_cf = kappa * kappa + gauss;
  for (std::size_t i = 0; i < 256; i += 41) {
    CHECK(jd.q[i] == doctest::Approx(q_cf).epsilon(1e-5));
    CHECK(jd.kappa[i] == doctest::Approx(kappa).epsilon(1e-5));
    CHECK(jd.ell[i] == doctest::Approx(rho).epsilon(1e-12));
  }
  CHECK(jd.lambda == doctest::Approx(q_cf).epsilon(1e-5));
}

TEST_CASE("graph areas bend with the second variation") {
  const NeckLab& lab = neck_lab();
  const double t = 0.4;
  Field up(256), dn(256);
  for (int i = 0; i < 256; ++i) {
    up[i] = t * lab.jd.eta[i];
    dn[i] = -t * lab.jd.eta[i];
  }
  const double a0 = area(lab.S, lab.m);
  const double ap = area(metric_graph(lab.g, lab.m, 0.0, up, 40.0), lab.m);
  const double am = area(metric_graph(lab.g, lab.m, 0.0, dn, 40.0), lab.m);
  const double second = (ap - 2.0 * a0 + am) / (t * t);
  CHECK(second == doctest::Approx(-lab.jd.lambda).epsilon(0.05));
}

TEST_CASE("the unstable region certificate on the standard neck") {
  const NeckLab& lab = neck_lab();
  const UnstableRegion& ur = lab.ur;
  CHECK(ur.shrink_steps == 0);
  CHECK(ur.intrinsic_period == doctest::Approx(150.0).epsilon(1e-12));
  CHECK(ur.R0 == doctest::Approx(18.75).epsilon(1e-9));
  CHECK(ur.R == doctest::Approx(0.45 * 18.75).epsilon(1e-9));
  CHECK(ur.Q < 0.0);
  CHECK(ur.phi_tilde[ur.center_index] == 0.0);

  // phi_tilde vanishes identically on the plateau r <= 1.1 R0 (71 nodes at
  // this spacing), stays within [0, eta_max], and is symmetric about b.
  int zeros = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    const double r = ring_gap(ur.arc[i], ur.center_arc, ur.intrinsic_period);
    if (r <= 1.09 * ur.R0) CHECK(ur.phi_tilde[i] == 0.0);
    if (ur.phi_tilde[i] == 0.0) ++zeros;
    CHECK(ur.phi_tilde[i] >= 0.0);
    CHECK(ur.phi_tilde[i] <= lab.jd.eta_max * (1.0 + 1e-12));
  }
  CHECK(zeros == 71);
  for (int kk : {7, 40, 100}) {
    const std::size_t a = (ur.center_index + kk) % 256;
    const std::size_t b = (ur.center_index + 256 - kk) % 256;
    CHECK(std::fabs(ur.phi_tilde[a] - ur.phi_tilde[b]) <= 1e-9 * lab.jd.eta_max);
  }
}

TEST_CASE("calibration pins the golden constants") {
  const NeckLab& lab = neck_lab();
  const CalibratedConstants& cc = lab.cc;
  CHECK(cc.omega == doctest::Approx(40.0).epsilon(1e-9));
  CHECK(cc.t0 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(cc.c0 == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(cc.z0 == 150.0);
  CHECK(cc.area_M == 150.0);
  CHECK(cc.area_B == doctest::Approx(16.9921875).epsilon(1e-12));
  CHECK(cc.omega1 == doctest::Approx(std::sqrt(150.0)).epsilon(1e-6));
  CHECK(cc.lambda == lab.jd.lambda);

  // Quadratic response of the slide: tau ~ -t0^2 Q / 2 with nonlinear slack.
  CHECK(cc.tau > 0.0);
  CHECK(cc.tau == doctest::Approx(-8.0 * lab.ur.Q).epsilon(0.4));

  // Sampled bending maxima sit under the profile bound max |rho'/rho^2| =
  // 0.1330 and above the closed-form value 0.1263 at the sampled height 16.
  CHECK(cc.K_A >= 0.120);
  CHECK(cc.K_A <= 0.135);

  CHECK(cc.margin_hole > 0.0);
  CHECK(cc.margin_slide > 0.0);
  CHECK(lab.rep.refine_worst <= 0.02);
  for (const auto& line : lab.rep.lines) {
    INFO(line.name);
    CHECK(line.margin > 0.0);
  }
}

TEST_CASE("the admissibility ladder orders epsilon") {
  const NeckLab& lab = neck_lab();
  auto ad = [&](double e) {
    return epsilon_admissibility(lab.S, lab.m, lab.cc, lab.jd, Epsilon(e));
  };
  const Admissibility a30 = ad(0.3), a10 = ad(0.1), a04 = ad(0.04), a02 = ad(0.02);
  CHECK_FALSE(a30.pass);
  CHECK_FALSE(a10.pass);
  CHECK_FALSE(a10.ok[0]);
  CHECK(a04.pass);
  CHECK(a02.pass);
  for (int k = 0; k < 4; ++k) CHECK(a02.margin[k] > a04.margin[k]);

  const double star = epsilon_star(lab.S, lab.m, lab.cc, lab.jd);
  CHECK(star > 0.0415);
  CHECK(star < 0.0426);
  CHECK(ad(star - 1e-4).pass);
  CHECK_FALSE(ad(star + 1e-3).pass);
}

TEST_CASE("double cover splittings are orthogonal") {
  const NeckLab& lab = neck_lab();
  std::mt19937_64 rng(20260814);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field phi2(512);
    for (auto& v : phi2) v = u(rng);
    const CoverSplit cs = double_cover_splitting(lab.S, lab.m, phi2);
    const double scale = 1.0 + std::fabs(cs.q_even) + std::fabs(cs.q_odd);
    CHECK(std::fabs(cs.q_total - cs.q_even - cs.q_odd) <= 1e-12 * scale);
  }

  Field even(512), odd(512);
  for (int i = 0; i < 256; ++i) {
    const double v = u(rng);
    even[i] = v;
    even[i + 256] = v;
    odd[i] = v;
    odd[i + 256] = -v;
  }
  const CoverSplit ce = double_cover_splitting(lab.S, lab.m, even);
  const CoverSplit co = double_cover_splitting(lab.S, lab.m, odd);
  CHECK(ce.q_odd == 0.0);
  CHECK(co.q_even == 0.0);
  CHECK(ce.q_total == doctest::Approx(ce.q_even).epsilon(1e-14));

  // Handing the deck swap explicitly changes nothing.
  std::vector<std::size_t> deck(512);
  for (std::size_t i = 0; i < 512; ++i) deck[i] = (i + 256) % 512;
  Field phi2(512);
  for (auto& v : phi2) v = u(rng);
  const CoverSplit c1 = double_cover_splitting(lab.S, lab.m, phi2);
  const CoverSplit c2 = double_cover_splitting(lab.S, lab.m, phi2, &deck);
  CHECK(c1.q_even == c2.q_even);
  CHECK(c1.q_odd == c2.q_odd);
}

TEST_CASE("broken involutions are rejected") {
  const NeckLab& lab = neck_lab();
  Field phi2(512, 0.1);

  std::vector<std::size_t> not_inv(512);
  for (std::size_t i = 0; i < 256; ++i) {
    not_inv[i] = (i + 1) % 256 + 256;
    not_inv[i + 256] = (i + 1) % 256;
  }
  CHECK_THROWS_AS(double_cover_splitting(lab.S, lab.m, phi2, &not_inv), std::invalid_argument);

  // A reflection about an off-symmetry node of a wavy section: pairs carry
  // different potentials, so the isometry test trips.
  Field wavy(256);
  for (int i = 0; i < 256; ++i) wavy[i] = 1.5 * std::sin(kTau * lab.g.coord(i, 0) / 100.0);
  const Hypersurface W = make_surface(lab.g, 0.0, wavy, 40.0);
  std::vector<std::size_t> refl(512);
  for (std::size_t i = 0; i < 256; ++i) {
    const std::size_t r = (6 + 256 - i) % 256;
    refl[i] = r + 256;
    refl[i + 256] = r;
  }
  CHECK_THROWS_AS(double_cover_splitting(W, lab.m, phi2, &refl), std::invalid_argument);

  // Deck swap with two crossed pairs: a valid isometric involution of the
  // constant ring that no longer respects adjacency.
  std::vector<std::size_t> crossed(512);
  for (std::size_t i = 0; i < 256; ++i) {
    crossed[i] = i + 256;
    crossed[i + 256] = i;
  }
  crossed[0] = 5 + 256;
  crossed[5 + 256] = 0;
  crossed[5] = 256;
  crossed[256] = 5;
  CHECK_THROWS_AS(double_cover_splitting(lab.S, lab.m, phi2, &crossed), std::invalid_argument);
}
