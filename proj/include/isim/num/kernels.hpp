#pragma once

#include <cstddef>

#include "isim/num/tensor.hpp"

namespace isim::num {

// Batched layer primitives. Each output element is produced by exactly one
// thread with a fixed inner summation order, so results are bit-identical
// for any OMP thread count and match the serial reference below.
//
// Pointer layout: x is [batch x in] row-major, w is [out x in], y is
// [batch x out]. The Matrix overloads are thin shape-checked wrappers.

double silu(double x);
double silu_grad(double x);
double sigmoid(double x);
double sigmoid_grad_from_output(double y);

// y = x * w^T + b
void linear_forward(const double* w, const double* b, int out, int in,
                    const double* x, int batch, double* y);
// dx += dy * w (skipped when dx null); dw += dy^T * x; db += colsum(dy)
void linear_backward(const double* w, const double* x, const double* dy,
                     int out, int in, int batch, double* dx, double* dw, double* db);

void layer_norm_forward(const double* gain, const double* shift, double eps,
                        int n, const double* x, int batch, double* y);
void layer_norm_backward(const double* gain, double eps, int n, const double* x,
                         const double* dy, int batch, double* dx, double* dgain,
                         double* dshift);

void silu_forward(const double* x, std::size_t n, double* y);
void silu_backward(const double* x, const double* dy, std::size_t n, double* dx);
void sigmoid_forward(const double* x, std::size_t n, double* y);
// Uses the cached forward output y rather than the input.
void sigmoid_backward(const double* y, const double* dy, std::size_t n, double* dx);

// Matrix convenience wrappers (used by tests and small callers).
void linear_forward(const Matrix& w, const Vector& b, const Matrix& x, Matrix& y);
void linear_backward(const Matrix& w, const Matrix& x, const Matrix& dy,
                     Matrix* dx, Matrix& dw, Vector& db);
void layer_norm_forward(const Vector& gain, const Vector& shift, double eps,
                        const Matrix& x, Matrix& y);
Vector layer_norm(const Vector& x, const Vector& gain, const Vector& shift,
                  double eps = 1e-5);
Vector dense_forward(const Matrix& w, const Vector& b, const Vector& x);

// Plain single-threaded reference implementations, kept for correctness
// tests and the kernel benchmark.
namespace serial {
void linear_forward(const double* w, const double* b, int out, int in,
                    const double* x, int batch, double* y);
void linear_backward(const double* w, const double* x, const double* dy,
                     int out, int in, int batch, double* dx, double* dw, double* db);
void layer_norm_forward(const double* gain, const double* shift, double eps,
                        int n, const double* x, int batch, double* y);
void layer_norm_backward(const double* gain, double eps, int n, const double* x,
                         const double* dy, int batch, double* dx, double* dgain,
                         double* dshift);
void silu_forward(const double* x, std::size_t n, double* y);
void silu_backward(const double* x, const double* dy, std::size_t n, double* dx);
void sigmoid_forward(const double* x, std::size_t n, double* y);
void sigmoid_backward(const double* y, const double* dy, std::size_t n, double* dx);
}  // namespace serial

}  // namespace isim::num
