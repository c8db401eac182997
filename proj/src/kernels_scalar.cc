// Copyright 2026 The cbl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstddef>

#include "cbl/kernels.h"

namespace cbl::kernels {
namespace {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void AxpyScalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void AddScalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void HadamardScalar(const double* a, const double* b, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void HadamardAccScalar(const double* a, const double* b, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void MatVecScalar(const double* m, const double* x, double* out,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = DotScalar(m + r * cols, x, cols);
  }
}

void MatVecTAccScalar(const double* m, const double* u, double* out,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    AxpyScalar(u[r], m + r * cols, out, cols);
  }
}

void Rank1Scalar(double alpha, const double* u, const double* v, double* m,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    AxpyScalar(alpha * u[r], v, m + r * cols, cols);
  }
}

void AdamScalar(double* param, const double* grad, double* m, double* v,
                std::size_t n, double step_size, double beta1, double beta2,
                double inv_bc2, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    param[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{
      "scalar",     DotScalar,    AxpyScalar,       AddScalar,
      HadamardScalar, HadamardAccScalar, MatVecScalar, MatVecTAccScalar,
      Rank1Scalar,  AdamScalar,
  };
  return table;
}

}  // namespace cbl::kernels
