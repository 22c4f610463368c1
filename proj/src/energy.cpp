#include <cmath>

#include "ac/energy.hpp"
#include "ac/kernels.hpp"
#include "ac/operators.hpp"
#include "ac/potential.hpp"

namespace ac {

EnergyReport energy(const Metric& m, const Field& u, Epsilon eps) {
  check_shape(m.grid, u, "energy");
  const auto& K = kernels::ops();
  EnergyReport r;
  r.epsilon = eps.value;
  r.sigma = sigma_constant();
  const double pref = 1.0 / (2.0 * r.sigma);

  r.gradient_term = pref * 0.5 * eps.value * dirichlet_form(m, u, u);

  Field w(u.size());
  K.w_batch(u.data(), w.data(), u.size());
  r.potential_term = pref / eps.value * K.sum_w(w.data(), m.vol.data(), w.size());

  r.total = r.gradient_term + r.potential_term;
  r.equipartition_defect =
      std::fabs(r.gradient_term - r.potential_term) / std::max(r.total, 1e-300);
  return r;
}

Field first_variation(const Metric& m, const Field& u, Epsilon eps) {
  check_shape(m.grid, u, "first_variation");
  Field out;
  laplace_beltrami(m, u, out);
  Field dw(u.size());
  kernels::ops().dw_batch(u.data(), dw.data(), u.size());
  const double inv_eps = 1.0 / eps.value;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = eps.value * out[i] - inv_eps * dw[i];
  return out;
}

double second_variation(const Metric& m, const Field& u, const Field& phi, Epsilon eps) {
  check_shape(m.grid, u, "second_variation");
  check_shape(m.grid, phi, "second_variation");
  Field d2w(u.size());
  kernels::ops().d2w_batch(u.data(), d2w.data(), u.size());
  double pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) pot += d2w[i] * phi[i] * phi[i] * m.vol[i];
  return eps.value * dirichlet_form(m, phi, phi) + pot / eps.value;
}

double perturbed_functional(const Metric& m, const Field& u, Epsilon eps, double mu) {
  const EnergyReport r = energy(m, u, eps);
  const double mass = kernels::ops().sum_w(u.data(), m.vol.data(), u.size());
  return r.total - mu / (2.0 * r.sigma) * mass;
}

Field perturbed_first_variation(const Metric& m, const Field& u, Epsilon eps, double mu) {
  Field out = first_variation(m, u, eps);
  for (double& v : out) v += mu;
  return out;
}

}  // namespace ac
