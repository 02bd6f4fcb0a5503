#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "isim/errors.hpp"

namespace isim::num {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over one flat parameter vector. A non-finite
// gradient rejects the whole update and leaves optimizer state untouched.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamConfig cfg = {});

  void step(std::span<double> params, std::span<const double> grads);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  // Checkpoint restore.
  void restore(std::uint64_t t, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace isim::num
