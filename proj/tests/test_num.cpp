#include <cmath>

#include "doctest.h"
#include "isim/num/adam.hpp"
#include "isim/num/gradcheck.hpp"
#include "isim/num/kernels.hpp"
#include "isim/num/mlp.hpp"
#include "isim/num/rng.hpp"

using namespace isim;
using namespace isim::num;

TEST_CASE("rng: fixed (seed, stream) reproduces the sequence exactly") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, 8);
  bool differs = false;
  Rng a2(42, 7);
  for (int i = 0; i < 16; ++i) differs |= (a2.next_u64() != c.next_u64());
  CHECK(differs);
}

TEST_CASE("rng: uniform stays in [0,1), normal has sane moments") {
  Rng r(1, 0);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / 20000) < 0.03);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("dense_forward: identity, zero-weight and hand-multiply cases") {
  Matrix eye(2, 2);
  eye.at(0, 0) = 1;
  eye.at(1, 1) = 1;
  auto y = dense_forward(eye, {0, 0}, {1, 2});
  CHECK(y[0] == doctest::Approx(1));
  CHECK(y[1] == doctest::Approx(2));

  Matrix zero(2, 3);
  y = dense_forward(zero, {3, 3}, {9, -4, 0.5});
  CHECK(y[0] == doctest::Approx(3));
  CHECK(y[1] == doctest::Approx(3));

  // Independent oracle: explicit dot products.
  Rng r(5, 0);
  Matrix w(3, 2);
  for (auto& v : w.data) v = r.uniform(-1, 1);
  Vector b = {r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
  Vector x = {1, 1};
  y = dense_forward(w, b, x);
  for (int o = 0; o < 3; ++o) {
    double expect = b[o];
    for (int i = 0; i < 2; ++i) expect += w.at(o, i) * x[i];
    CHECK(y[o] == doctest::Approx(expect).epsilon(1e-12));
  }

  CHECK_THROWS_AS(dense_forward(w, b, {1, 2, 3}), shape_error);
}

TEST_CASE("layer_norm: constant input, two-point closed form, zero gain") {
  Vector gain(4, 1.0), shift(4, 0.0);
  auto y = layer_norm({3.3, 3.3, 3.3, 3.3}, gain, shift);
  for (double v : y) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));

  // x=(1,-1): mean 0, population std 1, so output is (+1,-1) up to eps.
  auto y2 = layer_norm({1.0, -1.0}, {1.0, 1.0}, {0.0, 0.0});
  CHECK(y2[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(y2[1] == doctest::Approx(-1.0).epsilon(1e-4));

  auto y3 = layer_norm({2, 7, -1}, {0, 0, 0}, {5, 5, 5});
  for (double v : y3) CHECK(v == doctest::Approx(5.0));
}

TEST_CASE("silu/sigmoid: fixed points and finite-difference derivative") {
  CHECK(silu(0.0) == doctest::Approx(0.0));
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  const double h = 1e-6;
  const double numeric = (silu(1.0 + h) - silu(1.0 - h)) / (2 * h);
  CHECK(std::abs(silu_grad(1.0) - numeric) < 1e-6);

  // sigmoid stays strictly inside (0,1); affine rescale stays in bounds.
  Rng r(11, 0);
  const double lo = 0.4, hi = 0.85;
  for (int i = 0; i < 10000; ++i) {
    const double s = sigmoid(r.uniform(-60, 60));
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    const double a = lo + (hi - lo) * s;
    CHECK(a >= lo);
    CHECK(a <= hi);
  }
}

TEST_CASE("adam: zero grad, first-step magnitude, two-step recursion, NaN fault") {
  AdamConfig cfg;

  SUBCASE("zero gradient leaves parameters unchanged") {
    Adam opt(3, cfg);
    std::vector<double> p = {1, -2, 3}, g = {0, 0, 0};
    opt.step(p, g);
    CHECK(p[0] == 1);
    CHECK(p[1] == -2);
    CHECK(p[2] == 3);
    CHECK(opt.steps() == 1);
  }

  SUBCASE("first step moves by about lr*sign(g)") {
    Adam opt(2, cfg);
    std::vector<double> p = {0.0, 0.0}, g = {0.37, -5.1};
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-cfg.lr).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(cfg.lr).epsilon(1e-6));
  }

  SUBCASE("two identical steps match the scalar moment recursion") {
    Adam opt(1, cfg);
    std::vector<double> p = {0.0};
    const double g = 0.8;
    std::vector<double> gv = {g};
    opt.step(p, gv);
    opt.step(p, gv);
    // Hand recursion for m_t and v_t after two steps with constant g.
    double m = 0, v = 0;
    for (int t = 0; t < 2; ++t) {
      m = cfg.beta1 * m + (1 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    }
    CHECK(opt.first_moment()[0] == doctest::Approx(m).epsilon(1e-12));
    CHECK(opt.second_moment()[0] == doctest::Approx(v).epsilon(1e-12));
  }

  SUBCASE("NaN gradient is rejected as a numeric fault") {
    Adam opt(2, cfg);
    std::vector<double> p = {1, 1};
    std::vector<double> g = {0.1, std::nan("")};
    CHECK_THROWS_AS(opt.step(p, g), numeric_error);
    CHECK(p[0] == 1);
    CHECK(opt.steps() == 0);
  }
}

namespace {

LossFn squared_loss() {
  return {[](const Vector& y) {
            double s = 0;
            for (double v : y) s += v * v;
            return 0.5 * s;
          },
          [](const Vector& y) { return y; }};
}

Vector random_input(int n, Rng& r) {
  Vector x(n);
  for (auto& v : x) v = r.uniform(-1.5, 1.5);
  return x;
}

}  // namespace

TEST_CASE("grad_check: linear, SiLU and LayerNorm architectures") {
  Rng r(2024, 3);

  SUBCASE("linear net with squared loss is near-exact") {
    auto net = Mlp::make({{LayerKind::Linear, 4, 3}}, r);
    CHECK(grad_check(net, squared_loss(), random_input(4, r)) < 1e-8);
  }

  SUBCASE("two-layer SiLU net") {
    auto net = Mlp::make({{LayerKind::Linear, 5, 8},
                          {LayerKind::SiLU},
                          {LayerKind::Linear, 8, 3}},
                         r);
    CHECK(grad_check(net, squared_loss(), random_input(5, r)) < 1e-4);
  }

  SUBCASE("net with LayerNorm") {
    auto net = Mlp::make({{LayerKind::Linear, 5, 8},
                          {LayerKind::LayerNorm},
                          {LayerKind::SiLU},
                          {LayerKind::Linear, 8, 2}},
                         r);
    CHECK(grad_check(net, squared_loss(), random_input(5, r)) < 1e-4);
  }

  SUBCASE("sigmoid head as used by the actor") {
    auto net = Mlp::make({{LayerKind::Linear, 6, 8},
                          {LayerKind::SiLU},
                          {LayerKind::Linear, 8, 4},
                          {LayerKind::Sigmoid}},
                         r);
    CHECK(grad_check(net, squared_loss(), random_input(6, r)) < 1e-4);
  }
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  Rng r(77, 0);
  const int batch = 33, in = 19, out = 23;
  std::vector<double> w(static_cast<std::size_t>(out) * in), b(out),
      x(static_cast<std::size_t>(batch) * in), dy(static_cast<std::size_t>(batch) * out);
  for (auto& v : w) v = r.uniform(-1, 1);
  for (auto& v : b) v = r.uniform(-1, 1);
  for (auto& v : x) v = r.uniform(-2, 2);
  for (auto& v : dy) v = r.uniform(-1, 1);

  std::vector<double> y1(static_cast<std::size_t>(batch) * out),
      y2(static_cast<std::size_t>(batch) * out);
  linear_forward(w.data(), b.data(), out, in, x.data(), batch, y1.data());
  serial::linear_forward(w.data(), b.data(), out, in, x.data(), batch, y2.data());
  CHECK(y1 == y2);

  std::vector<double> dx1(x.size(), 0), dx2(x.size(), 0), dw1(w.size(), 0),
      dw2(w.size(), 0), db1(out, 0), db2(out, 0);
  linear_backward(w.data(), x.data(), dy.data(), out, in, batch, dx1.data(),
                  dw1.data(), db1.data());
  serial::linear_backward(w.data(), x.data(), dy.data(), out, in, batch, dx2.data(),
                          dw2.data(), db2.data());
  CHECK(dx1 == dx2);
  CHECK(dw1 == dw2);
  CHECK(db1 == db2);

  std::vector<double> gain(in), shift(in);
  for (auto& v : gain) v = r.uniform(0.5, 1.5);
  for (auto& v : shift) v = r.uniform(-0.5, 0.5);
  std::vector<double> n1(x.size()), n2(x.size());
  layer_norm_forward(gain.data(), shift.data(), 1e-5, in, x.data(), batch, n1.data());
  serial::layer_norm_forward(gain.data(), shift.data(), 1e-5, in, x.data(), batch,
                             n2.data());
  CHECK(n1 == n2);

  std::vector<double> dyn(x.size());
  for (auto& v : dyn) v = r.uniform(-1, 1);
  std::vector<double> lx1(x.size(), 0), lx2(x.size(), 0), dg1(in, 0), dg2(in, 0),
      ds1(in, 0), ds2(in, 0);
  layer_norm_backward(gain.data(), 1e-5, in, x.data(), dyn.data(), batch, lx1.data(),
                      dg1.data(), ds1.data());
  serial::layer_norm_backward(gain.data(), 1e-5, in, x.data(), dyn.data(), batch,
                              lx2.data(), dg2.data(), ds2.data());
  CHECK(lx1 == lx2);
  CHECK(dg1 == dg2);
  CHECK(ds1 == ds2);
}

TEST_CASE("polyak update is a per-parameter contraction toward the online net") {
  Rng r(9, 1);
  auto spec = std::vector<LayerSpec>{{LayerKind::Linear, 4, 6},
                                     {LayerKind::SiLU},
                                     {LayerKind::Linear, 6, 2}};
  auto online = Mlp::make(spec, r);
  auto target = Mlp::make(spec, r);
  const double tau = 0.005;
  std::vector<double> before(target.params().begin(), target.params().end());
  Mlp::polyak_update(target, online, tau);
  auto t = target.params();
  auto o = online.params();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double gap_before = std::abs(before[i] - o[i]);
    const double gap_after = std::abs(t[i] - o[i]);
    CHECK(gap_after == doctest::Approx((1 - tau) * gap_before).epsilon(1e-12));
  }
  // tau = 0 leaves the target untouched.
  std::vector<double> frozen(t.begin(), t.end());
  Mlp::polyak_update(target, online, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == frozen[i]);
}

TEST_CASE("mlp: fan-in init is deterministic and zero-head starts at midpoint") {
  Rng r1(3, 0), r2(3, 0);
  auto spec = std::vector<LayerSpec>{{LayerKind::Linear, 20, 16},
                                     {LayerKind::LayerNorm},
                                     {LayerKind::SiLU},
                                     {LayerKind::Linear, 16, 5},
                                     {LayerKind::Sigmoid}};
  auto a = Mlp::make(spec, r1, true);
  auto b = Mlp::make(spec, r2, true);
  auto pa = a.params();
  auto pb = b.params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

  // Zeroed last linear layer drives the sigmoid head to exactly 0.5.
  Vector x(20, 0.37);
  auto y = a.forward(x);
  for (double v : y) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}
