#pragma once

#include <cmath>
#include <cstdlib>

namespace ac {

// Double well W(x) = (1-x^2)^2/4 on [-2,2], blended to exact quadratic growth
// beyond |x| = 2.5. The blend is cubic-Hermite in W'' on [2, 2.5] from
// (W''=11, slope 12) to (W''=2, slope 0), integrated twice, so W is C^2
// globally, W >= 0, wells at +-1 with W''(+-1) = 2.
struct Potential {
  static constexpr double mod_radius = 2.0;    // quartic inside
  static constexpr double blend_end = 2.5;     // pure quadratic beyond

  static double w(double x) {
    double a = std::fabs(x);
    if (a <= 2.0) {
      double q = 1.0 - x * x;
      return 0.25 * q * q;
    }
    if (a <= 2.5) {
      double t = (a - 2.0) * 2.0;
      // 2.25 + 3t + 1.375t^2 + 0.25t^3 - 0.8125t^4 + 0.3t^5
      return 2.25 + t * (3.0 + t * (1.375 + t * (0.25 + t * (-0.8125 + t * 0.3))));
    }
    double s = a - 2.5;
    return 6.3625 + 9.5 * s + s * s;
  }
  static double dw(double x) {
    double a = std::fabs(x);
    double v;
    if (a <= 2.0) return x * (x * x - 1.0);
    if (a <= 2.5) {
      double t = (a - 2.0) * 2.0;
      // 6 + 5.5t + 1.5t^2 - 6.5t^3 + 3t^4
      v = 6.0 + t * (5.5 + t * (1.5 + t * (-6.5 + t * 3.0)));
    } else {
      v = 9.5 + 2.0 * (a - 2.5);
    }
    return x < 0 ? -v : v;
  }
  static double d2w(double x) {
    double a = std::fabs(x);
    if (a <= 2.0) return 3.0 * x * x - 1.0;
    if (a <= 2.5) {
      double t = (a - 2.0) * 2.0;
      // 11 + 6t - 39t^2 + 24t^3
      return 11.0 + t * (6.0 + t * (-39.0 + t * 24.0));
    }
    return 2.0;
  }
  // sqrt(W/2), exact for the quartic branch; used by the heteroclinic ODE and
  // the varifold primitive.
  static double sqrt_w_half(double x) { return std::sqrt(0.5 * w(x)); }
  // Phi(u) = int_0^u sqrt(W(t)/2) dt: closed form on the quartic branch,
  // Simpson on the (rarely visited) blended tail beyond |u| = 2.
  static double phi(double u) {
    double a = std::fabs(u);
    double v;
    const double c = 1.0 / (2.0 * std::sqrt(2.0));
    if (a <= 1.0) {
      v = c * (a - a * a * a / 3.0);
    } else if (a <= 2.0) {
      v = c * (2.0 / 3.0) + c * (a * a * a / 3.0 - a + 2.0 / 3.0);
    } else {
      v = 2.0 * c + phi_tail(a);
    }
    return u < 0 ? -v : v;
  }

 private:
  // int_2^a sqrt(W/2) by 16-point Gauss-Legendre, split at the blend joint
  // 2.5 so each piece has an analytic integrand (W has no zeros there); the
  // rule is then effectively exact and smooth in a.
  static double phi_tail(double a) {
    double s = gl16(2.0, a < 2.5 ? a : 2.5);
    if (a > 2.5) s += gl16(2.5, a);
    return s;
  }
  static double gl16(double lo, double hi) {
    static constexpr double gx[8] = {0.0950125098376374, 0.2816035507792589,
                                     0.4580167776572274, 0.6178762444026438,
                                     0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
    static constexpr double gw[8] = {0.1894506104550685, 0.1826034150449236,
                                     0.1691565193950025, 0.1495959888165767,
                                     0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};
    const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 8; ++i)
      s += gw[i] * (sqrt_w_half(mid - half * gx[i]) + sqrt_w_half(mid + half * gx[i]));
    return half * s;
  }
};

// sigma = int_{-1}^{1} sqrt(W(t)/2) dt = sqrt(2)/3 for the standard well.
double sigma_constant();
// Same integral by composite quadrature at m panels (self-check hook).
double sigma_quadrature(int m);

}  // namespace ac
