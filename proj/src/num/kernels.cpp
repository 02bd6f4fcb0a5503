#include "isim/num/kernels.hpp"

#include <cmath>

namespace isim::num {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

double sigmoid(double x) {
  // Saturation would round to exactly 0 or 1 for |x| > ~37; keep the output
  // strictly inside (0,1) so affine rescaling never escapes its bounds.
  const double s = 1.0 / (1.0 + std::exp(-x));
  if (s >= 1.0) return std::nextafter(1.0, 0.0);
  if (s <= 0.0) return std::nextafter(0.0, 1.0);
  return s;
}

double sigmoid_grad_from_output(double y) { return y * (1.0 - y); }

namespace {

// Forward accumulates input-major over a transposed weight copy: every
// output element keeps one fixed-order summation chain (deterministic for
// any thread count) while the inner loop vectorizes across outputs.
thread_local std::vector<double> g_wt_scratch;

}  // namespace

void linear_forward(const double* w, const double* b, int out, int in,
                    const double* x, int batch, double* y) {
  if (batch <= 2 || out < 8 || static_cast<std::size_t>(out) * in < 1024) {
    // Small case: plain dot products, same order as the packed path.
    for (int bi = 0; bi < batch; ++bi) {
      const double* xr = x + static_cast<std::size_t>(bi) * in;
      double* yr = y + static_cast<std::size_t>(bi) * out;
      for (int o = 0; o < out; ++o) {
        const double* wr = w + static_cast<std::size_t>(o) * in;
        double acc = b[o];
        for (int i = 0; i < in; ++i) acc += wr[i] * xr[i];
        yr[o] = acc;
      }
    }
    return;
  }
  std::vector<double>& wt = g_wt_scratch;
  wt.resize(static_cast<std::size_t>(in) * out);
  for (int o = 0; o < out; ++o)
    for (int i = 0; i < in; ++i)
      wt[static_cast<std::size_t>(i) * out + o] = w[static_cast<std::size_t>(o) * in + i];
#pragma omp parallel for schedule(static) if (batch >= 8)
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * in;
    double* yr = y + static_cast<std::size_t>(bi) * out;
    for (int o = 0; o < out; ++o) yr[o] = b[o];
    for (int i = 0; i < in; ++i) {
      const double xv = xr[i];
      const double* wr = wt.data() + static_cast<std::size_t>(i) * out;
      for (int o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
}

void linear_backward(const double* w, const double* x, const double* dy,
                     int out, int in, int batch, double* dx, double* dw, double* db) {
  if (dx) {
#pragma omp parallel for schedule(static) if (batch >= 8)
    for (int bi = 0; bi < batch; ++bi) {
      const double* dyr = dy + static_cast<std::size_t>(bi) * out;
      double* dxr = dx + static_cast<std::size_t>(bi) * in;
      for (int o = 0; o < out; ++o) {
        const double g = dyr[o];
        const double* wr = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) dxr[i] += g * wr[i];
      }
    }
  }
  // One thread owns each output row of dw/db; the batch sum runs in a
  // fixed order, so results do not depend on the thread count.
#pragma omp parallel for schedule(static) if (out >= 8)
  for (int o = 0; o < out; ++o) {
    double* dwr = dw + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int bi = 0; bi < batch; ++bi) {
      const double g = dy[static_cast<std::size_t>(bi) * out + o];
      acc += g;
      const double* xr = x + static_cast<std::size_t>(bi) * in;
      for (int i = 0; i < in; ++i) dwr[i] += g * xr[i];
    }
    db[o] += acc;
  }
}

void layer_norm_forward(const double* gain, const double* shift, double eps,
                        int n, const double* x, int batch, double* y) {
#pragma omp parallel for schedule(static) if (batch >= 8)
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * n;
    double* yr = y + static_cast<std::size_t>(bi) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) yr[j] = gain[j] * ((xr[j] - mean) * inv) + shift[j];
  }
}

void layer_norm_backward(const double* gain, double eps, int n, const double* x,
                         const double* dy, int batch, double* dx, double* dgain,
                         double* dshift) {
  // Row statistics once; both the dx pass and the parameter pass reuse them.
  thread_local std::vector<double> g_ln_stats;
  g_ln_stats.resize(2 * static_cast<std::size_t>(batch));
  double* means = g_ln_stats.data();
  double* invs = means + batch;
#pragma omp parallel for schedule(static) if (batch >= 8)
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= n;
    means[bi] = mean;
    invs[bi] = 1.0 / std::sqrt(var + eps);
  }
  if (dx) {
#pragma omp parallel for schedule(static) if (batch >= 8)
    for (int bi = 0; bi < batch; ++bi) {
      const double* xr = x + static_cast<std::size_t>(bi) * n;
      const double* dyr = dy + static_cast<std::size_t>(bi) * n;
      double* dxr = dx + static_cast<std::size_t>(bi) * n;
      const double mean = means[bi];
      const double inv = invs[bi];
      double sum_dh = 0.0, sum_dhx = 0.0;
      for (int j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean) * inv;
        const double dh = dyr[j] * gain[j];
        sum_dh += dh;
        sum_dhx += dh * xhat;
      }
      for (int j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean) * inv;
        const double dh = dyr[j] * gain[j];
        dxr[j] += inv * (dh - sum_dh / n - xhat * sum_dhx / n);
      }
    }
  }
#pragma omp parallel for schedule(static) if (n >= 64)
  for (int j = 0; j < n; ++j) {
    double dg = 0.0, ds = 0.0;
    for (int bi = 0; bi < batch; ++bi) {
      const double* xr = x + static_cast<std::size_t>(bi) * n;
      const double xhat = (xr[j] - means[bi]) * invs[bi];
      const double g = dy[static_cast<std::size_t>(bi) * n + j];
      dg += g * xhat;
      ds += g;
    }
    dgain[j] += dg;
    dshift[j] += ds;
  }
}

void silu_forward(const double* x, std::size_t n, double* y) {
#pragma omp parallel for schedule(static) if (n >= 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = silu(x[i]);
}

void silu_backward(const double* x, const double* dy, std::size_t n, double* dx) {
#pragma omp parallel for schedule(static) if (n >= 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    dx[i] = dy[i] * silu_grad(x[i]);
}

void sigmoid_forward(const double* x, std::size_t n, double* y) {
#pragma omp parallel for schedule(static) if (n >= 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] = sigmoid(x[i]);
}

void sigmoid_backward(const double* y, const double* dy, std::size_t n, double* dx) {
#pragma omp parallel for schedule(static) if (n >= 2048)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    dx[i] = dy[i] * sigmoid_grad_from_output(y[i]);
}

// --- Matrix wrappers --------------------------------------------------------

void linear_forward(const Matrix& w, const Vector& b, const Matrix& x, Matrix& y) {
  require_shape(static_cast<int>(b.size()) == w.rows, "linear: bias/out mismatch");
  require_shape(x.cols == w.cols, "linear: input dim mismatch");
  y.resize(x.rows, w.rows);
  linear_forward(w.data.data(), b.data(), w.rows, w.cols, x.data.data(), x.rows,
                 y.data.data());
}

void linear_backward(const Matrix& w, const Matrix& x, const Matrix& dy,
                     Matrix* dx, Matrix& dw, Vector& db) {
  require_shape(dy.rows == x.rows && dy.cols == w.rows, "linear_backward: dy shape");
  require_shape(dw.rows == w.rows && dw.cols == w.cols, "linear_backward: dw shape");
  require_shape(static_cast<int>(db.size()) == w.rows, "linear_backward: db shape");
  if (dx) dx->resize(x.rows, x.cols);
  linear_backward(w.data.data(), x.data.data(), dy.data.data(), w.rows, w.cols,
                  x.rows, dx ? dx->data.data() : nullptr, dw.data.data(), db.data());
}

void layer_norm_forward(const Vector& gain, const Vector& shift, double eps,
                        const Matrix& x, Matrix& y) {
  require_shape(static_cast<int>(gain.size()) == x.cols &&
                    static_cast<int>(shift.size()) == x.cols,
                "layer_norm: gain/shift dim mismatch");
  require_shape(x.cols >= 2, "layer_norm: needs at least 2 features");
  y.resize(x.rows, x.cols);
  layer_norm_forward(gain.data(), shift.data(), eps, x.cols, x.data.data(), x.rows,
                     y.data.data());
}

Vector layer_norm(const Vector& x, const Vector& gain, const Vector& shift,
                  double eps) {
  Matrix xm(1, static_cast<int>(x.size()));
  xm.data = x;
  Matrix ym;
  layer_norm_forward(gain, shift, eps, xm, ym);
  return ym.data;
}

Vector dense_forward(const Matrix& w, const Vector& b, const Vector& x) {
  require_shape(static_cast<int>(x.size()) == w.cols, "dense_forward: input dim");
  Matrix xm(1, w.cols);
  xm.data = x;
  Matrix ym;
  linear_forward(w, b, xm, ym);
  return ym.data;
}

// --- Serial reference -------------------------------------------------------
// Same arithmetic order as the parallel kernels, minus the pragmas; tests
// assert bitwise equality between the two.

namespace serial {

void linear_forward(const double* w, const double* b, int out, int in,
                    const double* x, int batch, double* y) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * in;
    double* yr = y + static_cast<std::size_t>(bi) * out;
    for (int o = 0; o < out; ++o) {
      const double* wr = w + static_cast<std::size_t>(o) * in;
      double acc = b[o];
      for (int i = 0; i < in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
}

void linear_backward(const double* w, const double* x, const double* dy,
                     int out, int in, int batch, double* dx, double* dw, double* db) {
  if (dx) {
    for (int bi = 0; bi < batch; ++bi) {
      const double* dyr = dy + static_cast<std::size_t>(bi) * out;
      double* dxr = dx + static_cast<std::size_t>(bi) * in;
      for (int o = 0; o < out; ++o) {
        const double g = dyr[o];
        const double* wr = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) dxr[i] += g * wr[i];
      }
    }
  }
  for (int o = 0; o < out; ++o) {
    double* dwr = dw + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int bi = 0; bi < batch; ++bi) {
      const double g = dy[static_cast<std::size_t>(bi) * out + o];
      acc += g;
      const double* xr = x + static_cast<std::size_t>(bi) * in;
      for (int i = 0; i < in; ++i) dwr[i] += g * xr[i];
    }
    db[o] += acc;
  }
}

void layer_norm_forward(const double* gain, const double* shift, double eps,
                        int n, const double* x, int batch, double* y) {
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * n;
    double* yr = y + static_cast<std::size_t>(bi) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) yr[j] = gain[j] * ((xr[j] - mean) * inv) + shift[j];
  }
}

void layer_norm_backward(const double* gain, double eps, int n, const double* x,
                         const double* dy, int batch, double* dx, double* dgain,
                         double* dshift) {
  std::vector<double> means(batch), invs(batch);
  for (int bi = 0; bi < batch; ++bi) {
    const double* xr = x + static_cast<std::size_t>(bi) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= n;
    means[bi] = mean;
    invs[bi] = 1.0 / std::sqrt(var + eps);
  }
  if (dx) {
    for (int bi = 0; bi < batch; ++bi) {
      const double* xr = x + static_cast<std::size_t>(bi) * n;
      const double* dyr = dy + static_cast<std::size_t>(bi) * n;
      double* dxr = dx + static_cast<std::size_t>(bi) * n;
      const double mean = means[bi];
      const double inv = invs[bi];
      double sum_dh = 0.0, sum_dhx = 0.0;
      for (int j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean) * inv;
        const double dh = dyr[j] * gain[j];
        sum_dh += dh;
        sum_dhx += dh * xhat;
      }
      for (int j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean) * inv;
        const double dh = dyr[j] * gain[j];
        dxr[j] += inv * (dh - sum_dh / n - xhat * sum_dhx / n);
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    double dg = 0.0, ds = 0.0;
    for (int bi = 0; bi < batch; ++bi) {
      const double* xr = x + static_cast<std::size_t>(bi) * n;
      const double xhat = (xr[j] - means[bi]) * invs[bi];
      const double g = dy[static_cast<std::size_t>(bi) * n + j];
      dg += g * xhat;
      ds += g;
    }
    dgain[j] += dg;
    dshift[j] += ds;
  }
}

void silu_forward(const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = silu(x[i]);
}

void silu_backward(const double* x, const double* dy, std::size_t n, double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * silu_grad(x[i]);
}

void sigmoid_forward(const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(x[i]);
}

void sigmoid_backward(const double* y, const double* dy, std::size_t n, double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * sigmoid_grad_from_output(y[i]);
}

}  // namespace serial

}  // namespace isim::num
