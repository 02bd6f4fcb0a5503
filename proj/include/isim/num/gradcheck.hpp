#pragma once

#include <functional>

#include "isim/num/mlp.hpp"

namespace isim::num {

// Scalar loss over the network output together with its gradient.
struct LossFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

// Compares backprop gradients against central finite differences over every
// parameter. Returns max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
double grad_check(Mlp& net, const LossFn& loss, const Vector& x,
                  double step = 1e-5);

}  // namespace isim::num
