#include "isim/num/mlp.hpp"

#include <cmath>

namespace isim::num {

namespace {

std::size_t layer_param_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Linear:
      return static_cast<std::size_t>(l.out) * l.in + l.out;
    case LayerKind::LayerNorm:
      return 2 * static_cast<std::size_t>(l.out);
    default:
      return 0;
  }
}

}  // namespace

Mlp Mlp::make(const std::vector<LayerSpec>& layers, Rng& rng, bool zero_last_linear) {
  require_shape(!layers.empty(), "mlp: empty layer list");
  Mlp net;
  net.layers_ = layers;
  int dim = layers.front().kind == LayerKind::Linear ? layers.front().in
                                                     : layers.front().out;
  net.input_dim_ = dim;
  std::size_t total = 0;
  for (auto& l : net.layers_) {
    if (l.kind == LayerKind::Linear) {
      require_shape(l.in == dim, "mlp: layer input dim mismatch");
      dim = l.out;
    } else {
      // Shape-preserving layers inherit the running dim.
      if (l.out == 0) l.out = dim;
      require_shape(l.out == dim, "mlp: layer dim mismatch");
      l.in = dim;
    }
    net.offsets_.push_back(total);
    total += layer_param_count(l);
  }
  net.output_dim_ = dim;
  net.params_.assign(total, 0.0);

  int last_linear = -1;
  for (int i = 0; i < static_cast<int>(net.layers_.size()); ++i)
    if (net.layers_[i].kind == LayerKind::Linear) last_linear = i;

  for (int i = 0; i < static_cast<int>(net.layers_.size()); ++i) {
    const auto& l = net.layers_[i];
    double* p = net.params_.data() + net.offsets_[i];
    if (l.kind == LayerKind::Linear) {
      if (zero_last_linear && i == last_linear) continue;
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
      const std::size_t n = static_cast<std::size_t>(l.out) * l.in + l.out;
      for (std::size_t k = 0; k < n; ++k) p[k] = rng.uniform(-bound, bound);
    } else if (l.kind == LayerKind::LayerNorm) {
      for (int k = 0; k < l.out; ++k) p[k] = 1.0;  // gain
      // shift stays zero
    }
  }
  return net;
}

void Mlp::forward_batch(const Matrix& x, MlpCache& cache, Matrix& y) const {
  require_shape(x.cols == input_dim_, "mlp: input dim mismatch");
  cache.acts.resize(layers_.size() + 1);
  cache.acts[0] = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    const Matrix& in = cache.acts[li];
    Matrix& out = cache.acts[li + 1];
    const double* p = params_.data() + offsets_[li];
    const int batch = in.rows;
    switch (l.kind) {
      case LayerKind::Linear:
        out.resize(batch, l.out);
        linear_forward(p, p + static_cast<std::size_t>(l.out) * l.in, l.out, l.in,
                       in.data.data(), batch, out.data.data());
        break;
      case LayerKind::LayerNorm:
        out.resize(batch, l.out);
        layer_norm_forward(p, p + l.out, ln_eps_, l.out, in.data.data(), batch,
                           out.data.data());
        break;
      case LayerKind::SiLU:
        out.resize(batch, l.out);
        silu_forward(in.data.data(), in.data.size(), out.data.data());
        break;
      case LayerKind::Sigmoid:
        out.resize(batch, l.out);
        sigmoid_forward(in.data.data(), in.data.size(), out.data.data());
        break;
    }
  }
  y = cache.acts.back();
}

Vector Mlp::forward(const Vector& x) const {
  Matrix xm(1, input_dim_);
  require_shape(static_cast<int>(x.size()) == input_dim_, "mlp: input dim mismatch");
  xm.data = x;
  MlpCache cache;
  Matrix y;
  forward_batch(xm, cache, y);
  return y.data;
}

void Mlp::backward_batch(const Matrix& dy, const MlpCache& cache,
                         std::vector<double>& grad, Matrix* dx) const {
  require_shape(grad.size() == params_.size(), "mlp: grad buffer size");
  require_shape(dy.cols == output_dim_, "mlp: dy dim mismatch");
  Matrix delta = dy;
  Matrix next;
  for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
    const auto& l = layers_[li];
    const Matrix& in = cache.acts[li];
    const double* p = params_.data() + offsets_[li];
    double* g = grad.data() + offsets_[li];
    const int batch = in.rows;
    const bool want_dx = (li > 0) || (dx != nullptr);
    switch (l.kind) {
      case LayerKind::Linear:
        if (want_dx) next.resize(batch, l.in);
        linear_backward(p, in.data.data(), delta.data.data(), l.out, l.in, batch,
                        want_dx ? next.data.data() : nullptr, g,
                        g + static_cast<std::size_t>(l.out) * l.in);
        break;
      case LayerKind::LayerNorm:
        if (want_dx) next.resize(batch, l.in);
        layer_norm_backward(p, ln_eps_, l.out, in.data.data(), delta.data.data(),
                            batch, want_dx ? next.data.data() : nullptr, g, g + l.out);
        break;
      case LayerKind::SiLU:
        next.resize(batch, l.in);
        silu_backward(in.data.data(), delta.data.data(), in.data.size(),
                      next.data.data());
        break;
      case LayerKind::Sigmoid:
        next.resize(batch, l.in);
        sigmoid_backward(cache.acts[li + 1].data.data(), delta.data.data(),
                         in.data.size(), next.data.data());
        break;
    }
    if (li == 0) {
      if (dx) *dx = next;
    } else {
      std::swap(delta, next);
    }
  }
}

void Mlp::polyak_update(Mlp& target, const Mlp& online, double tau) {
  require_shape(target.params_.size() == online.params_.size(),
                "polyak: parameter count mismatch");
  const std::size_t n = target.params_.size();
  double* t = target.params_.data();
  const double* o = online.params_.data();
#pragma omp parallel for schedule(static) if (n >= 8192)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    t[i] += tau * (o[i] - t[i]);
}

}  // namespace isim::num
