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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cbl/errors.h"
#include "oracles.h"

namespace cbl::hrr {
namespace {

using V = std::vector<double>;

TEST(CircConv, TwoDimensionalExample) {
  const V a{1, 2}, b{3, 4};
  EXPECT_EQ(oracle::Conv(a, b), (V{11, 10}));
  EXPECT_EQ(CircConv(a, b, ConvMethod::kDirect), (V{11, 10}));
  const V fft = CircConv(a, b, ConvMethod::kFft);
  EXPECT_NEAR(fft[0], 11.0, 1e-12);
  EXPECT_NEAR(fft[1], 10.0, 1e-12);
}

TEST(CircConv, IdentityElement) {
  std::mt19937_64 rng(1);
  for (std::size_t d : {1, 5, 64, 100}) {
    const V a = oracle::Gaussian(d, rng);
    V e0(d, 0.0);
    e0[0] = 1.0;
    EXPECT_EQ(CircConv(a, e0, ConvMethod::kDirect), a);
    EXPECT_LE(oracle::MaxAbsDiff(CircConv(a, e0, ConvMethod::kFft), a), 1e-12);
  }
}

TEST(CircConv, MatchesDoubleLoopAndFftAgrees) {
  std::mt19937_64 rng(2);
  for (std::size_t d : {2, 3, 8, 17, 63, 64, 128, 255, 512, 1000, 1024}) {
    const V a = oracle::Gaussian(d, rng);
    const V b = oracle::Gaussian(d, rng);
    const V ref = oracle::Conv(a, b);
    const V direct = CircConv(a, b, ConvMethod::kDirect);
    const V fft = CircConv(a, b, ConvMethod::kFft);
    EXPECT_LE(oracle::MaxAbsDiff(direct, ref), 1e-10) << d;
    EXPECT_LE(oracle::MaxAbsDiff(fft, direct), 1e-9) << d;
    EXPECT_LE(oracle::MaxAbsDiff(CircConv(a, b), ref), 1e-9) << d;
  }
}

TEST(CircConv, AlgebraicLaws) {
  std::mt19937_64 rng(3);
  for (std::size_t d : {7, 64, 256}) {
    const V a = oracle::Gaussian(d, rng);
    const V b = oracle::Gaussian(d, rng);
    const V c = oracle::Gaussian(d, rng);
    EXPECT_LE(oracle::MaxAbsDiff(CircConv(a, b), CircConv(b, a)), 1e-12);
    EXPECT_LE(oracle::MaxAbsDiff(CircConv(CircConv(a, b), c),
                                 CircConv(a, CircConv(b, c))),
              1e-9);
    V ab(d);
    for (std::size_t i = 0; i < d; ++i) ab[i] = 2.0 * a[i] - 3.0 * b[i];
    const V lhs = CircConv(ab, c);
    const V ac = CircConv(a, c), bc = CircConv(b, c);
    V rhs(d);
    for (std::size_t i = 0; i < d; ++i) rhs[i] = 2.0 * ac[i] - 3.0 * bc[i];
    EXPECT_LE(oracle::MaxAbsDiff(lhs, rhs), 1e-9);
  }
}

TEST(CircConv, FftRouteIsBitwiseCommutative) {
  std::mt19937_64 rng(4);
  const V a = oracle::Gaussian(256, rng);
  const V b = oracle::Gaussian(256, rng);
  EXPECT_EQ(CircConv(a, b, ConvMethod::kFft), CircConv(b, a, ConvMethod::kFft));
}

TEST(CircConv, SizeMismatchIsDomainError) {
  const V a{1, 2, 3}, b{1, 2};
  EXPECT_THROW(CircConv(a, b), DomainError);
  EXPECT_THROW(CircCorr(a, b), DomainError);
  V out(2);
  EXPECT_THROW(CircConvInto(a, a, out), DomainError);
}

TEST(CircCorr, InvolutionAndIdentity) {
  EXPECT_EQ(Involution(V{1, 2, 3}), (V{1, 3, 2}));
  const V b{4, -1, 2.5, 7};
  EXPECT_EQ(CircCorr(V{1, 0, 0, 0}, b, ConvMethod::kDirect), b);
}

TEST(CircCorr, IsAdjointOfConvolution) {
  std::mt19937_64 rng(5);
  for (std::size_t d : {6, 64, 200}) {
    const V a = oracle::Gaussian(d, rng);
    const V b = oracle::Gaussian(d, rng);
    const V u = oracle::Gaussian(d, rng);
    // u . (a * b) == a . corr(b, u)
    EXPECT_NEAR(oracle::Dot(u, oracle::Conv(a, b)), oracle::Dot(a, CircCorr(b, u)),
                1e-9);
    V acc(d, 1.0);
    CircCorrAcc(b, u, acc);
    const V corr = CircCorr(b, u);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(acc[i], corr[i] + 1.0, 1e-12);
  }
}

TEST(CircCorr, ApproximatelyUnbinds) {
  // Random unit vectors: each Fourier power |A_k|^2 is roughly exponential,
  // so the recovered cosine concentrates near 1/sqrt(2).
  std::mt19937_64 rng(6);
  double total = 0.0;
  for (int t = 0; t < 100; ++t) {
    const V a = oracle::Unit(512, rng);
    const V b = oracle::Unit(512, rng);
    total += oracle::Cosine(CircCorr(a, CircConv(a, b)), b);
  }
  EXPECT_NEAR(total / 100.0, 1.0 / std::sqrt(2.0), 0.03);
}

TEST(CircCorr, UnitaryVectorsUnbindExactly) {
  // Build a with unit-magnitude spectrum: a_n = (1/d) sum_k cos(2 pi k n / d + phi_k)
  // with conjugate-symmetric phases.
  const std::size_t d = 64;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> phase(-M_PI, M_PI);
  std::vector<double> phi(d, 0.0);
  for (std::size_t k = 1; k < d / 2; ++k) {
    phi[k] = phase(rng);
    phi[d - k] = -phi[k];
  }
  phi[d / 2] = 0.0;
  V a(d, 0.0);
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t k = 0; k < d; ++k) a[n] += std::cos(2 * M_PI * k * n / d + phi[k]) / d;
  }
  const V b = oracle::Unit(d, rng);
  EXPECT_LE(oracle::MaxAbsDiff(CircCorr(a, CircConv(a, b)), b), 1e-12);
}

}  // namespace
}  // namespace cbl::hrr
