#include "isim/num/gradcheck.hpp"

#include <cmath>

namespace isim::num {

double grad_check(Mlp& net, const LossFn& loss, const Vector& x, double step) {
  Matrix xm(1, net.input_dim());
  xm.data = x;

  MlpCache cache;
  Matrix y;
  net.forward_batch(xm, cache, y);
  const Vector gy = loss.grad(y.data);
  Matrix dy(1, net.output_dim());
  dy.data = gy;

  std::vector<double> analytic(net.param_count(), 0.0);
  net.backward_batch(dy, cache, analytic, nullptr);

  auto params = net.params();
  double worst = 0.0;
  MlpCache scratch;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    const double h = step * std::max(1.0, std::abs(saved));
    params[i] = saved + h;
    net.forward_batch(xm, scratch, y);
    const double up = loss.value(y.data);
    params[i] = saved - h;
    net.forward_batch(xm, scratch, y);
    const double down = loss.value(y.data);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace isim::num
