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

#include "cbl/circular.h"

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "cbl/errors.h"
#include "cbl/kernels.h"

namespace cbl::hrr {
namespace {

void CheckSizes(std::size_t a, std::size_t b, std::size_t out) {
  if (a != b || a != out) {
    throw DomainError("circular convolution: dimension mismatch (" +
                      std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// c_i = dot(a, r2[d - i .. 2d - i)) where r2 is b reversed (through the
// involution) and repeated twice.
void DirectConv(std::span<const double> a, std::span<const double> b,
                std::span<double> out) {
  const std::size_t d = a.size();
  std::vector<double> r2(2 * d);
  for (std::size_t m = 0; m < d; ++m) {
    const double v = b[(d - m) % d];
    r2[m] = v;
    r2[m + d] = v;
  }
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = kernels::Dot(a, std::span<const double>(r2).subspan(d - i, d));
  }
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Plans are created once per size under a lock (FFTW's planner is not
// thread-safe) and then executed through the new-array interface with
// per-thread scratch buffers.
struct Plan {
  std::size_t n = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

const Plan& PlanFor(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Plan>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = plans[n];
  if (!slot) {
    auto plan = std::make_unique<Plan>();
    plan->n = n;
    std::unique_ptr<double, FftwFree> real(
        static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> spec(static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    plan->forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(),
                                         spec.get(), FFTW_ESTIMATE);
    plan->backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.get(),
                                          real.get(), FFTW_ESTIMATE);
    slot = std::move(plan);
  }
  return *slot;
}

struct Scratch {
  std::size_t n = 0;
  std::unique_ptr<double, FftwFree> real;
  std::unique_ptr<fftw_complex, FftwFree> spec_a;
  std::unique_ptr<fftw_complex, FftwFree> spec_b;

  void Reserve(std::size_t size) {
    if (n == size) return;
    n = size;
    real.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    spec_a.reset(static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    spec_b.reset(static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  }
};

void FftConv(std::span<const double> a, std::span<const double> b,
             std::span<double> out) {
  const std::size_t d = a.size();
  const Plan& plan = PlanFor(d);
  thread_local Scratch scratch;
  scratch.Reserve(d);
  double* real = scratch.real.get();
  fftw_complex* fa = scratch.spec_a.get();
  fftw_complex* fb = scratch.spec_b.get();

  std::copy(a.begin(), a.end(), real);
  fftw_execute_dft_r2c(plan.forward, real, fa);
  std::copy(b.begin(), b.end(), real);
  fftw_execute_dft_r2c(plan.forward, real, fb);
  const std::size_t bins = d / 2 + 1;
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute_dft_c2r(plan.backward, fa, real);
  const double inv_n = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = real[i] * inv_n;
}

bool UseFft(ConvMethod method, std::size_t d) {
  switch (method) {
    case ConvMethod::kDirect:
      return false;
    case ConvMethod::kFft:
      return true;
    case ConvMethod::kAuto:
      break;
  }
  return d >= kFftThreshold;
}

}  // namespace

void CircConvInto(std::span<const double> a, std::span<const double> b,
                  std::span<double> out, ConvMethod method) {
  CheckSizes(a.size(), b.size(), out.size());
  if (a.empty()) return;
  if (UseFft(method, a.size())) {
    FftConv(a, b, out);
  } else {
    DirectConv(a, b, out);
  }
}

std::vector<double> CircConv(std::span<const double> a,
                             std::span<const double> b, ConvMethod method) {
  std::vector<double> out(a.size());
  CircConvInto(a, b, out, method);
  return out;
}

std::vector<double> Involution(std::span<const double> a) {
  const std::size_t d = a.size();
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = a[(d - i) % d];
  return out;
}

std::vector<double> CircCorr(std::span<const double> a,
                             std::span<const double> b, ConvMethod method) {
  if (a.size() != b.size()) CheckSizes(a.size(), b.size(), a.size());
  return CircConv(Involution(a), b, method);
}

void CircCorrAcc(std::span<const double> a, std::span<const double> b,
                 std::span<double> out, ConvMethod method) {
  CheckSizes(a.size(), b.size(), out.size());
  const std::vector<double> c = CircCorr(a, b, method);
  kernels::Add(out, c, out);
}

}  // namespace cbl::hrr
