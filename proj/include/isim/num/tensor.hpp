#pragma once

#include <cstddef>
#include <vector>

#include "isim/errors.hpp"

namespace isim::num {

using Vector = std::vector<double>;

// Dense row-major matrix. Kept deliberately small: the kernels in
// kernels.hpp do the actual work.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, 0.0);
  }
};

inline void require_shape(bool ok, const char* what) {
  if (!ok) throw shape_error(what);
}

}  // namespace isim::num
