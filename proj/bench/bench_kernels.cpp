// Compares the OpenMP kernels against the serial reference at the batch
// shapes the agents actually use, and reports effective GFLOP/s.

#include <chrono>
#include <cstdio>
#include <vector>

#include "isim/num/kernels.hpp"
#include "isim/num/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace isim::num;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Shape {
  int batch, in, out;
};

void bench_linear(const Shape& s, int reps) {
  Rng r(123, 0);
  std::vector<double> w(static_cast<std::size_t>(s.out) * s.in), b(s.out),
      x(static_cast<std::size_t>(s.batch) * s.in),
      y(static_cast<std::size_t>(s.batch) * s.out),
      dy(static_cast<std::size_t>(s.batch) * s.out),
      dx(static_cast<std::size_t>(s.batch) * s.in), dw(w.size()), db(s.out);
  for (auto& v : w) v = r.uniform(-1, 1);
  for (auto& v : b) v = r.uniform(-1, 1);
  for (auto& v : x) v = r.uniform(-1, 1);
  for (auto& v : dy) v = r.uniform(-1, 1);

  const double fwd_flops = 2.0 * s.batch * s.in * s.out;
  const double bwd_flops = 4.0 * s.batch * s.in * s.out;

  auto t0 = clock_type::now();
  for (int i = 0; i < reps; ++i)
    serial::linear_forward(w.data(), b.data(), s.out, s.in, x.data(), s.batch, y.data());
  const double serial_fwd = seconds_since(t0) / reps;

  t0 = clock_type::now();
  for (int i = 0; i < reps; ++i)
    linear_forward(w.data(), b.data(), s.out, s.in, x.data(), s.batch, y.data());
  const double omp_fwd = seconds_since(t0) / reps;

  t0 = clock_type::now();
  for (int i = 0; i < reps; ++i) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    serial::linear_backward(w.data(), x.data(), dy.data(), s.out, s.in, s.batch,
                            dx.data(), dw.data(), db.data());
  }
  const double serial_bwd = seconds_since(t0) / reps;

  t0 = clock_type::now();
  for (int i = 0; i < reps; ++i) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    linear_backward(w.data(), x.data(), dy.data(), s.out, s.in, s.batch, dx.data(),
                    dw.data(), db.data());
  }
  const double omp_bwd = seconds_since(t0) / reps;

  std::printf("linear %4dx%4d batch %3d | fwd serial %7.3f ms (%5.1f GF/s)"
              " omp %7.3f ms (%5.1f GF/s) | bwd serial %7.3f ms omp %7.3f ms"
              " | speedup fwd %.2fx bwd %.2fx\n",
              s.in, s.out, s.batch, serial_fwd * 1e3, fwd_flops / serial_fwd * 1e-9,
              omp_fwd * 1e3, fwd_flops / omp_fwd * 1e-9, serial_bwd * 1e3,
              omp_bwd * 1e3, serial_fwd / omp_fwd, serial_bwd / omp_bwd);
  (void)bwd_flops;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled\n");
#endif
  // Shapes used by the TD3 critics/actor and PPO nets.
  bench_linear({256, 25, 256}, 200);
  bench_linear({256, 256, 256}, 100);
  bench_linear({256, 256, 1}, 400);
  bench_linear({256, 20, 256}, 200);
  bench_linear({256, 256, 5}, 400);

  // Layer norm at actor width.
  {
    Rng r(9, 0);
    const int batch = 256, n = 256;
    std::vector<double> gain(n, 1.0), shift(n, 0.0),
        x(static_cast<std::size_t>(batch) * n), y(x.size());
    for (auto& v : x) v = r.uniform(-2, 2);
    auto t0 = clock_type::now();
    for (int i = 0; i < 200; ++i)
      serial::layer_norm_forward(gain.data(), shift.data(), 1e-5, n, x.data(), batch,
                                 y.data());
    const double s = seconds_since(t0) / 200;
    t0 = clock_type::now();
    for (int i = 0; i < 200; ++i)
      layer_norm_forward(gain.data(), shift.data(), 1e-5, n, x.data(), batch, y.data());
    const double p = seconds_since(t0) / 200;
    std::printf("layer_norm 256 batch 256 | serial %.3f ms omp %.3f ms | speedup %.2fx\n",
                s * 1e3, p * 1e3, s / p);
  }
  return 0;
}
