#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ac/kernels.hpp"
#include "ac/operators.hpp"
#include "ac/potential.hpp"
#include "ac/spectrum.hpp"

namespace ac {

void linearized_apply(const Metric& m, const Field& d2w_over_eps, Epsilon eps, const Field& phi,
                      Field& out) {
  laplace_beltrami(m, phi, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -eps.value * out[i] + d2w_over_eps[i] * phi[i];
}

namespace {

// Cyclic Jacobi for the small projected problem (m <= ~40).
void small_eigen(std::vector<double> a, int n, std::vector<double>& val,
                 std::vector<double>& vec) {
  vec.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return vec[static_cast<std::size_t>(j) * n + i]; };
  for (int sweep = 0; sweep < 80; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-28 * (1.0 + off) * n * n) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return A(i, i) < A(j, j); });
  val.resize(n);
  std::vector<double> sorted(vec.size());
  for (int j = 0; j < n; ++j) {
    val[j] = A(idx[j], idx[j]);
    for (int i = 0; i < n; ++i)
      sorted[static_cast<std::size_t>(j) * n + i] = vec[static_cast<std::size_t>(idx[j]) * n + i];
  }
  vec = std::move(sorted);
}

}  // namespace

SpectralReport spectrum(const Metric& m, const Field& u, Epsilon eps, int k, double tol_res,
                        int max_iter) {
  check_shape(m.grid, u, "spectrum");
  if (k < 1 || k > 10) throw std::invalid_argument("spectrum: k must lie in [1, 10]");
  const std::size_t n = m.grid.size;
  const auto& K = kernels::ops();

  Field q(n);  // W''(u)/eps
  K.d2w_batch(u.data(), q.data(), n);
  for (double& v : q) v /= eps.value;

  Field diag(n);
  double diag_max = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int a = 0; a < m.grid.d; ++a) s += m.fp[a][i] + m.fm[a][i];
    diag[i] = eps.value * m.inv_rho_d[i] * s + q[i];
    diag_max = std::max(diag_max, diag[i]);
  }

  auto apply = [&](const Field& x, Field& out) { linearized_apply(m, q, eps, x, out); };
  auto vdot = [&](const Field& a, const Field& b) {
    return K.dot_w(a.data(), b.data(), m.vol.data(), n);
  };

  // Two-pass modified Gram-Schmidt of x against basis; false if degenerate.
  auto project_normalize = [&](Field& x, const std::vector<Field>& basis, int count) {
    const double n0 = std::sqrt(vdot(x, x));
    if (!(n0 > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (int b = 0; b < count; ++b) {
        const double c = vdot(x, basis[b]);
        K.axpy(x.data(), -c, basis[b].data(), n);
      }
    const double n1 = std::sqrt(vdot(x, x));
    if (n1 < 1e-8 * n0 || !(n1 > 0.0)) return false;
    const double inv = 1.0 / n1;
    for (double& v : x) v *= inv;
    return true;
  };

  const int kb = std::min<std::size_t>(k + 2, n - 2);
  std::vector<Field> X(kb), AX(kb), P, AP;
  std::mt19937_64 rng(987654321u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  {
    std::vector<Field> accepted;
    for (int i = 0; i < kb; ++i) {
      Field x(n);
      do {
        for (double& v : x) v = dist(rng);
      } while (!project_normalize(x, accepted, static_cast<int>(accepted.size())));
      accepted.push_back(std::move(x));
    }
    X = std::move(accepted);
  }
  for (int i = 0; i < kb; ++i) {
    AX[i].resize(n);
    apply(X[i], AX[i]);
  }

  std::vector<double> lambda(kb, 0.0);
  SpectralReport rep;
  rep.epsilon = eps.value;
  rep.tol = 1e-6 / eps.value;

  // Initial Rayleigh-Ritz on X alone.
  {
    std::vector<double> M(static_cast<std::size_t>(kb) * kb);
    for (int i = 0; i < kb; ++i)
      for (int j = i; j < kb; ++j)
        M[static_cast<std::size_t>(i) * kb + j] = M[static_cast<std::size_t>(j) * kb + i] =
            0.5 * (vdot(X[i], AX[j]) + vdot(X[j], AX[i]));
    std::vector<double> val, vec;
    small_eigen(M, kb, val, vec);
    std::vector<Field> Xn(kb, Field(n, 0.0)), AXn(kb, Field(n, 0.0));
    for (int i = 0; i < kb; ++i)
      for (int a = 0; a < kb; ++a) {
        const double c = vec[static_cast<std::size_t>(i) * kb + a];
        K.axpy(Xn[i].data(), c, X[a].data(), n);
        K.axpy(AXn[i].data(), c, AX[a].data(), n);
      }
    X = std::move(Xn);
    AX = std::move(AXn);
    lambda = val;
  }

  Field r(n), w(n);
  for (int it = 1; it <= max_iter; ++it) {
    rep.iterations = it;

    bool all_ok = true;
    for (int i = 0; i < k && all_ok; ++i) {
      r = AX[i];
      K.axpy(r.data(), -lambda[i], X[i].data(), n);
      if (std::sqrt(vdot(r, r)) > tol_res * std::max(1.0, std::fabs(lambda[i]))) all_ok = false;
    }
    if (all_ok) {
      rep.converged = true;
      break;
    }

    // Assemble the trial basis S = [X | precond residuals | P].
    std::vector<Field> S = X, AS = AX;
    const int nx = kb;
    std::vector<int> news;
    for (int i = 0; i < kb; ++i) {
      r = AX[i];
      K.axpy(r.data(), -lambda[i], X[i].data(), n);
      w = r;
      const double floor = 1e-2 * (std::fabs(diag_max) + std::fabs(lambda[i])) + 1e-30;
      for (std::size_t j = 0; j < n; ++j) w[j] /= std::max(diag[j] - lambda[i], floor);
      if (project_normalize(w, S, static_cast<int>(S.size()))) {
        S.push_back(w);
        news.push_back(static_cast<int>(S.size()) - 1);
      }
    }
    for (auto& p : P) {
      if (project_normalize(p, S, static_cast<int>(S.size()))) {
        S.push_back(p);
        news.push_back(static_cast<int>(S.size()) - 1);
      }
    }
    const int ns = static_cast<int>(S.size());
    AS.resize(ns, Field(n));
    for (int a = nx; a < ns; ++a) apply(S[a], AS[a]);

    std::vector<double> M(static_cast<std::size_t>(ns) * ns);
    for (int i = 0; i < ns; ++i)
      for (int j = i; j < ns; ++j)
        M[static_cast<std::size_t>(i) * ns + j] = M[static_cast<std::size_t>(j) * ns + i] =
            0.5 * (vdot(S[i], AS[j]) + vdot(S[j], AS[i]));
    std::vector<double> val, vec;
    small_eigen(M, ns, val, vec);

    std::vector<Field> Xn(kb, Field(n, 0.0)), AXn(kb, Field(n, 0.0));
    std::vector<Field> Pn, APn;
    for (int i = 0; i < kb; ++i) {
      Field pi(n, 0.0), api(n, 0.0);
      for (int a = 0; a < ns; ++a) {
        const double c = vec[static_cast<std::size_t>(i) * ns + a];
        K.axpy(Xn[i].data(), c, S[a].data(), n);
        K.axpy(AXn[i].data(), c, AS[a].data(), n);
        if (a >= nx) {
          K.axpy(pi.data(), c, S[a].data(), n);
          K.axpy(api.data(), c, AS[a].data(), n);
        }
      }
      const double pn = std::sqrt(vdot(pi, pi));
      if (pn > 1e-12) {
        const double inv = 1.0 / pn;
        for (double& v : pi) v *= inv;
        for (double& v : api) v *= inv;
        Pn.push_back(std::move(pi));
        APn.push_back(std::move(api));
      }
      lambda[i] = val[i];
    }
    X = std::move(Xn);
    AX = std::move(AXn);
    P = std::move(Pn);
    AP = std::move(APn);
  }

  rep.eigenvalues.assign(lambda.begin(), lambda.begin() + k);
  rep.eigenvectors.assign(X.begin(), X.begin() + k);
  for (double v : rep.eigenvalues) {
    if (v < -rep.tol) ++rep.morse_index;
    if (std::fabs(v) <= rep.tol) ++rep.nullity;
  }
  rep.strictly_stable = rep.eigenvalues[0] > rep.tol;
  return rep;
}

}  // namespace ac
