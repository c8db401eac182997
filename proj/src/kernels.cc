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

#include "cbl/kernels.h"

#include <cassert>
#include <cstdlib>
#include <string_view>

namespace cbl::kernels {

#if defined(CBL_HAVE_AVX2)
const KernelTable& Avx2KernelsUnchecked();
#endif

const KernelTable* Avx2Kernels() {
#if defined(CBL_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") &&
                                __builtin_cpu_supports("fma");
  return supported ? &Avx2KernelsUnchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& Active() {
  static const KernelTable& table = [&]() -> const KernelTable& {
    const char* forced = std::getenv("CBL_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") {
      return ScalarKernels();
    }
    if (const KernelTable* avx2 = Avx2Kernels()) return *avx2;
    return ScalarKernels();
  }();
  return table;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return Active().dot(a.data(), b.data(), a.size());
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

void Add(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  Active().add(a.data(), b.data(), out.data(), a.size());
}

void Hadamard(std::span<const double> a, std::span<const double> b,
              std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  Active().hadamard(a.data(), b.data(), out.data(), a.size());
}

void HadamardAcc(std::span<const double> a, std::span<const double> b,
                 std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  Active().hadamard_acc(a.data(), b.data(), out.data(), a.size());
}

void MatVec(std::span<const double> m, std::span<const double> x,
            std::span<double> out) {
  assert(m.size() == x.size() * out.size());
  Active().matvec(m.data(), x.data(), out.data(), out.size(), x.size());
}

void MatVecTransposedAcc(std::span<const double> m, std::span<const double> u,
                         std::span<double> out) {
  assert(m.size() == u.size() * out.size());
  Active().matvec_t_acc(m.data(), u.data(), out.data(), u.size(), out.size());
}

void Rank1(double alpha, std::span<const double> u, std::span<const double> v,
           std::span<double> m) {
  assert(m.size() == u.size() * v.size());
  Active().rank1(alpha, u.data(), v.data(), m.data(), u.size(), v.size());
}

}  // namespace cbl::kernels
