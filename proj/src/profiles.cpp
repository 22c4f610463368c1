#include <algorithm>
#include <cmath>

#include "ac/profiles.hpp"

namespace ac {

double cutoff_chi(double s) {
  const double a = std::fabs(s) - 1.0;
  if (a <= 0.0) return 1.0;
  if (a >= 1.0) return 0.0;
  const double g = 1.0 - a * a;
  return std::exp(1.0 - 1.0 / g);
}

double cutoff_chi_d1(double s) {
  const double a = std::fabs(s) - 1.0;
  if (a <= 0.0 || a >= 1.0) return 0.0;
  const double g = 1.0 - a * a;
  const double d = -2.0 * a / (g * g) * std::exp(1.0 - 1.0 / g);
  return s < 0 ? -d : d;
}

double cutoff_chi_d2(double s) {
  const double a = std::fabs(s) - 1.0;
  if (a <= 0.0 || a >= 1.0) return 0.0;
  const double g = 1.0 - a * a;
  const double g2 = g * g;
  return std::exp(1.0 - 1.0 / g) * (4.0 * a * a / (g2 * g2) - 2.0 / g2 - 8.0 * a * a / (g2 * g));
}

Profile1D Profile1D::rescaled(double eps) const {
  Profile1D out;
  const auto v = value, s = slope, c = curvature;
  out.value = [v, eps](double r) { return v(r / eps); };
  out.slope = [s, eps](double r) { return s(r / eps) / eps; };
  out.curvature = [c, eps](double r) { return c(r / eps) / (eps * eps); };
  out.support_radius = support_radius * eps;
  return out;
}

Profile1D heteroclinic(const Potential&) {
  const double isq2 = 1.0 / std::sqrt(2.0);
  Profile1D p;
  p.value = [isq2](double r) { return std::tanh(r * isq2); };
  p.slope = [isq2](double r) {
    const double v = std::tanh(r * isq2);
    return (1.0 - v * v) * isq2;
  };
  // u'' = W'(u) along the connecting orbit
  p.curvature = [isq2](double r) { return Potential::dw(std::tanh(r * isq2)); };
  return p;
}

Profile1D truncate(const Profile1D& h, Epsilon eps) {
  const double lam = eps.lambda();
  const auto hv = h.value, hs = h.slope, hc = h.curvature;
  Profile1D out;
  out.support_radius = 2.0 * lam;
  out.value = [hv, lam](double r) {
    const double c = cutoff_chi(r / lam);
    if (c == 1.0) return hv(r);
    const double sgn = r < 0 ? -1.0 : 1.0;
    if (c == 0.0) return sgn;
    return c * hv(r) + (1.0 - c) * sgn;
  };
  out.slope = [hv, hs, lam](double r) {
    const double c = cutoff_chi(r / lam);
    if (c == 1.0) return hs(r);
    if (c == 0.0) return 0.0;
    const double sgn = r < 0 ? -1.0 : 1.0;
    return c * hs(r) + cutoff_chi_d1(r / lam) / lam * (hv(r) - sgn);
  };
  out.curvature = [hv, hs, hc, lam](double r) {
    const double c = cutoff_chi(r / lam);
    if (c == 1.0) return hc(r);
    if (c == 0.0) return 0.0;
    const double sgn = r < 0 ? -1.0 : 1.0;
    return c * hc(r) + 2.0 * cutoff_chi_d1(r / lam) / lam * hs(r) +
           cutoff_chi_d2(r / lam) / (lam * lam) * (hv(r) - sgn);
  };
  return out;
}

CollapsingProfile collapsing_family(Epsilon eps, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("collapsing_family: t must be >= 0");
  const Profile1D hbar_eps = truncate(heteroclinic(), eps).rescaled(eps.value);
  const double reach = 2.0 * eps.value * eps.lambda();  // ambient plateau radius

  CollapsingProfile psi;
  psi.t = t;
  psi.epsilon = eps.value;
  psi.dead_zone = std::max(0.0, 2.0 * reach - t);
  const auto v = hbar_eps.value, s = hbar_eps.slope;
  psi.value = [v, reach, t](double r) { return v(-std::fabs(r) + reach - t); };
  psi.slope = [s, reach, t](double r) {
    const double d = s(-std::fabs(r) + reach - t);
    return r < 0 ? d : -d;
  };
  return psi;
}

double line_energy(const std::function<double(double)>& value,
                   const std::function<double(double)>& slope, double radius, Epsilon eps,
                   int steps_per_eps) {
  if (!(radius > 0.0)) return 0.0;
  const double target = eps.value / steps_per_eps;
  int m = static_cast<int>(std::ceil(2.0 * radius / target));
  if (m % 2) ++m;
  const double h = 2.0 * radius / m;
  auto density = [&](double r) {
    const double d = slope(r), u = value(r);
    return 0.5 * eps.value * d * d + Potential::w(u) / eps.value;
  };
  double s = density(-radius) + density(radius);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * density(-radius + i * h);
  return s * h / 3.0 / (2.0 * sigma_constant());
}

TruncationResidual truncation_residual(const Profile1D& hbar_unit, Epsilon eps) {
  const double lam = eps.lambda();
  auto resid = [&](double r) {
    return hbar_unit.curvature(r) - Potential::dw(hbar_unit.value(r));
  };
  TruncationResidual out;
  const double lo = -2.0 * lam - 1.0, hi = 2.0 * lam + 1.0;
  const int n = 20000;
  const double dr = (hi - lo) / n;
  const double fd = 1e-4;
  for (int i = 0; i <= n; ++i) {
    const double r = lo + i * dr;
    const double r0 = resid(r);
    const double rp = resid(r + fd), rm = resid(r - fd);
    out.c0 = std::max(out.c0, std::fabs(r0));
    out.c1 = std::max(out.c1, std::fabs((rp - rm) / (2.0 * fd)));
    out.c2 = std::max(out.c2, std::fabs((rp - 2.0 * r0 + rm) / (fd * fd)));
  }
  const double e3 = eps.value * eps.value * eps.value;
  out.c0 /= e3;
  out.c1 /= e3;
  out.c2 /= e3;
  return out;
}

}  // namespace ac
