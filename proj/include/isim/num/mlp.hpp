#pragma once

#include <span>
#include <vector>

#include "isim/num/kernels.hpp"
#include "isim/num/rng.hpp"
#include "isim/num/tensor.hpp"

namespace isim::num {

enum class LayerKind { Linear, LayerNorm, SiLU, Sigmoid };

struct LayerSpec {
  LayerKind kind;
  int in = 0;
  int out = 0;
};

// Activation cache for one batched forward pass; acts[i] is the input of
// layer i, acts.back() the network output.
struct MlpCache {
  std::vector<Matrix> acts;
};

// Fixed-architecture feedforward net. All parameters live in one flat
// buffer so the optimizer, Polyak averaging and checkpoints can treat the
// net as a single vector.
class Mlp {
 public:
  Mlp() = default;

  // Chain of layers; dims must be consistent. Linear layers use uniform
  // fan-in init U(-1/sqrt(in), 1/sqrt(in)); zero_last_linear starts the
  // final linear layer at zero instead.
  static Mlp make(const std::vector<LayerSpec>& layers, Rng& rng,
                  bool zero_last_linear = false);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

  Vector forward(const Vector& x) const;
  void forward_batch(const Matrix& x, MlpCache& cache, Matrix& y) const;

  // Accumulates flat parameter gradients into grad (sized param_count);
  // dx (optional) receives the gradient w.r.t. the input batch.
  void backward_batch(const Matrix& dy, const MlpCache& cache,
                      std::vector<double>& grad, Matrix* dx) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  double layer_norm_eps() const { return ln_eps_; }

  // target += tau * (online - target), elementwise over the flat buffers.
  static void polyak_update(Mlp& target, const Mlp& online, double tau);

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;  // flat offset of each layer's params
  std::vector<double> params_;
  int input_dim_ = 0;
  int output_dim_ = 0;
  double ln_eps_ = 1e-5;
};

}  // namespace isim::num
