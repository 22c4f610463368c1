#include "ac/jacobi.hpp"

#include <cmath>
#include <stdexcept>

namespace ac {

namespace {

// Solve a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i on a ring via Thomas plus
// a Sherman-Morrison corner correction.
void thomas(const Field& a, Field b, const Field& c, Field d, Field& x) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  x.resize(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
}

void solve_cyclic(const Field& a, const Field& b, const Field& c, const Field& d, Field& x) {
  const std::size_t n = b.size();
  const double alpha = a[0], beta = c[n - 1];
  const double gamma = -b[0];
  Field bb = b;
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - alpha * beta / gamma;
  Field u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = beta;
  Field z;
  thomas(a, bb, c, d, x);
  thomas(a, bb, c, u, z);
  const double fact =
      (x[0] + alpha * x[n - 1] / gamma) / (1.0 + z[0] + alpha * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
}

struct SectionOperator {
  Field diag, offp, offm, ell;
  double h = 0.0;

  void apply(const Field& f, Field& out) const {
    const std::size_t n = f.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = i + 1 < n ? i + 1 : 0;
      const std::size_t im = i > 0 ? i - 1 : n - 1;
      out[i] = diag[i] * f[i] + offp[i] * f[ip] + offm[i] * f[im];
    }
  }
  double weighted(const Field& f, const Field& g2) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g2[i] * ell[i];
    return s * h;
  }
};

// A = -Delta_M - q in the node basis, self-adjoint under the ell h weight.
SectionOperator section_operator(const Field& q, const Field& ell, double h) {
  const std::size_t n = q.size();
  SectionOperator op;
  op.h = h;
  op.ell = ell;
  op.diag.resize(n);
  op.offp.resize(n);
  op.offm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const std::size_t im = i > 0 ? i - 1 : n - 1;
    const double cp = 2.0 / (ell[i] + ell[ip]);
    const double cm = 2.0 / (ell[i] + ell[im]);
    const double scale = 1.0 / (ell[i] * h * h);
    op.diag[i] = (cp + cm) * scale - q[i];
    op.offp[i] = -cp * scale;
    op.offm[i] = -cm * scale;
  }
  return op;
}

}  // namespace

void jacobi_assemble(const Hypersurface& S, const Metric& m, Field& q, Field& ell,
                     Field* kappa) {
  const Grid& g = S.ambient;
  if (g.d != 2)
    throw std::invalid_argument("jacobi: only curve sections in conformal surfaces (d = 2)");
  const Grid& b = S.base;
  const std::size_t n = b.size;
  const double h = b.h[0];
  const int va = 1;
  const bool analytic = m.family != Metric::Family::Custom;
  const double fd = 1e-3;

  // log rho and its derivatives on the ambient grid for the generic branch.
  Field U, Ux, Uy, LapU;
  if (!analytic) {
    U.resize(g.size);
    for (std::size_t i = 0; i < g.size; ++i) U[i] = std::log(m.rho[i]);
    Ux.resize(g.size);
    Uy.resize(g.size);
    LapU.resize(g.size);
    const std::size_t ny = static_cast<std::size_t>(g.dims[1]);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i + n * j;
        const std::size_t xp = (i + 1 < n ? i + 1 : 0) + n * j;
        const std::size_t xm = (i > 0 ? i - 1 : n - 1) + n * j;
        const std::size_t yp = i + n * (j + 1 < ny ? j + 1 : 0);
        const std::size_t ym = i + n * (j > 0 ? j - 1 : ny - 1);
        Ux[c] = (U[xp] - U[xm]) / (2.0 * g.h[0]);
        Uy[c] = (U[yp] - U[ym]) / (2.0 * g.h[1]);
        LapU[c] = (U[xp] - 2.0 * U[c] + U[xm]) / (g.h[0] * g.h[0]) +
                  (U[yp] - 2.0 * U[c] + U[ym]) / (g.h[1] * g.h[1]);
      }
  }

  auto interp_column = [&](const Field& f, std::size_t col, double y) {
    const double t = y / g.h[1];
    const double j = std::floor(t);
    const double w = t - j;
    const std::size_t j0 = static_cast<std::size_t>(g.wrap(static_cast<int>(j), va));
    const std::size_t j1 = static_cast<std::size_t>(g.wrap(static_cast<int>(j) + 1, va));
    return (1.0 - w) * f[col + n * j0] + w * f[col + n * j1];
  };

  q.resize(n);
  ell.resize(n);
  if (kappa) kappa->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const std::size_t im = i > 0 ? i - 1 : n - 1;
    const double dp = g.wrap_delta(S.phi[ip], S.phi[i], va);
    const double dm = g.wrap_delta(S.phi[i], S.phi[im], va);
    const double slope = (dp + dm) / (2.0 * h);
    const double curv = (dp - dm) / (h * h);
    const double y = S.level + S.phi[i];

    double u, ux, uy, lap;
    if (analytic) {
      const double u0 = std::log(m.rho_at_y(y));
      const double up = std::log(m.rho_at_y(y + fd));
      const double um = std::log(m.rho_at_y(y - fd));
      u = u0;
      ux = 0.0;
      uy = (up - um) / (2.0 * fd);
      lap = (up - 2.0 * u0 + um) / (fd * fd);
    } else {
      u = std::log(rho_at(m, i, y));
      ux = interp_column(Ux, i, y);
      uy = interp_column(Uy, i, y);
      lap = interp_column(LapU, i, y);
    }

    const double sq = 1.0 + slope * slope;
    const double root = std::sqrt(sq);
    const double kflat = curv / (sq * root);
    const double dn = (uy - slope * ux) / root;
    const double kg = std::exp(-u) * (kflat + dn);
    const double K = -std::exp(-2.0 * u) * lap;
    q[i] = kg * kg + K;
    ell[i] = std::exp(u) * root;
    if (kappa) (*kappa)[i] = kg;
  }
}

JacobiData jacobi_first_eigenpair(const Hypersurface& S, const Metric& m) {
  JacobiData jd;
  jacobi_assemble(S, m, jd.q, jd.ell, &jd.kappa);
  jd.h = S.base.h[0];
  const std::size_t n = jd.q.size();
  const SectionOperator op = section_operator(jd.q, jd.ell, jd.h);

  double lower = op.diag[0];
  for (std::size_t i = 0; i < n; ++i)
    lower = std::min(lower, op.diag[i] - std::fabs(op.offp[i]) - std::fabs(op.offm[i]));
  const double shift = lower - 1.0;

  Field a(n), bdiag(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = op.offm[i];
    bdiag[i] = op.diag[i] - shift;
    c[i] = op.offp[i];
  }

  Field x(n, 1.0), y, Ay;
  double mu = 0.0;
  bool converged = false;
  for (int it = 0; it < 400 && !converged; ++it) {
    solve_cyclic(a, bdiag, c, x, y);
    const double nrm = std::sqrt(op.weighted(y, y));
    for (double& v : y) v /= nrm;
    op.apply(y, Ay);
    mu = op.weighted(y, Ay);
    double res2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = Ay[i] - mu * y[i];
      res2 += r * r * jd.ell[i] * jd.h;
    }
    converged = std::sqrt(res2) <= 1e-11 * std::max(1.0, std::fabs(mu));
    x = y;
    jd.iterations = it + 1;
  }
  if (!converged) throw std::runtime_error("jacobi: inverse iteration stalled");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += y[i] * jd.ell[i];
  if (mean < 0)
    for (double& v : y) v = -v;
  jd.eta = std::move(y);
  jd.eta_min = jd.eta[0];
  jd.eta_max = jd.eta[0];
  for (double v : jd.eta) {
    jd.eta_min = std::min(jd.eta_min, v);
    jd.eta_max = std::max(jd.eta_max, v);
  }
  if (!(jd.eta_min > 1e-12 * jd.eta_max))
    throw std::runtime_error("jacobi: ground state lost positivity");
  jd.lambda = -mu;
  return jd;
}

double jacobi_quadratic_form(const JacobiData& jd, const Field& f) {
  const std::size_t n = jd.q.size();
  if (f.size() != n) throw std::invalid_argument("jacobi_quadratic_form: size mismatch");
  double grad = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 < n ? i + 1 : 0;
    const double df = f[ip] - f[i];
    grad += df * df / (0.5 * (jd.ell[i] + jd.ell[ip]));
    pot += jd.q[i] * f[i] * f[i] * jd.ell[i];
  }
  return grad / jd.h - pot * jd.h;
}

}  // namespace ac
