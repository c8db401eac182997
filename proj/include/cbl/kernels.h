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

#ifndef CBL_KERNELS_H_
#define CBL_KERNELS_H_

// Dense double-precision inner loops used by the encoders, the composition
// models and the optimizer. Every kernel has a scalar reference and, where
// the target supports it, an AVX2+FMA variant; the active table is picked
// once at startup from CPUID. Set CBL_KERNELS=scalar to force the reference.
//
// Add and Hadamard are bit-identical across
// variants. Reductions (Dot, MatVec) may differ in the last bits because the
// vector variants reassociate the sum.

#include <cstddef>
#include <span>
#include <string_view>

namespace cbl::kernels {

struct KernelTable {
  std::string_view name;

  // returns sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a + b
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // out = a * b (elementwise)
  void (*hadamard)(const double* a, const double* b, double* out,
                   std::size_t n);
  // out += a * b (elementwise)
  void (*hadamard_acc)(const double* a, const double* b, double* out,
                       std::size_t n);
  // out = m * x, m row-major rows x cols
  void (*matvec)(const double* m, const double* x, double* out,
                 std::size_t rows, std::size_t cols);
  // out += m^T * u
  void (*matvec_t_acc)(const double* m, const double* u, double* out,
                       std::size_t rows, std::size_t cols);
  // m += alpha * u v^T
  void (*rank1)(double alpha, const double* u, const double* v, double* m,
                std::size_t rows, std::size_t cols);
  // One Adam step over n parameters. step_size already folds in the bias
  // correction of the first moment; inv_bc2 = 1 / (1 - beta2^t).
  void (*adam)(double* param, const double* grad, double* m, double* v,
               std::size_t n, double step_size, double beta1, double beta2,
               double inv_bc2, double eps);
};

const KernelTable& ScalarKernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* Avx2Kernels();

// The table selected for this process.
const KernelTable& Active();

// Span conveniences over the active table. Sizes must match; checked by
// assert only, the callers are internal.
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Add(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
void Hadamard(std::span<const double> a, std::span<const double> b,
              std::span<double> out);
void HadamardAcc(std::span<const double> a, std::span<const double> b,
                 std::span<double> out);
void MatVec(std::span<const double> m, std::span<const double> x,
            std::span<double> out);
void MatVecTransposedAcc(std::span<const double> m, std::span<const double> u,
                         std::span<double> out);
void Rank1(double alpha, std::span<const double> u, std::span<const double> v,
           std::span<double> m);

}  // namespace cbl::kernels

#endif  // CBL_KERNELS_H_
