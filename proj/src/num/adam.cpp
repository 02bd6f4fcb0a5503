#include "isim/num/adam.hpp"

#include <cmath>

namespace isim::num {

Adam::Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {
  if (cfg_.lr <= 0 || cfg_.beta1 <= 0 || cfg_.beta2 <= 0 || cfg_.eps <= 0)
    throw config_error("adam: hyperparameters must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw shape_error("adam: parameter/gradient size mismatch");
  for (double g : grads)
    if (!std::isfinite(g))
      throw numeric_error("adam: non-finite gradient, update rejected");

  t_ += 1;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const std::size_t n = m_.size();
  double* m = m_.data();
  double* v = v_.data();
  double* p = params.data();
  const double* g = grads.data();
#pragma omp parallel for schedule(static) if (n >= 8192)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
    v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

void Adam::restore(std::uint64_t t, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw shape_error("adam: restore size mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace isim::num
