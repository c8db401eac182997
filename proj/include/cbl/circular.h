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

#ifndef CBL_CIRCULAR_H_
#define CBL_CIRCULAR_H_

// Circular convolution and correlation, the binding and approximate
// unbinding operators of holographic reduced representations.
//
//   conv(a, b)_i = sum_j a_j * b_{(i - j) mod d}
//   corr(a, b)   = conv(involution(a), b),  involution(a)_i = a_{(-i) mod d}
//
// Two routes: a direct O(d^2) sum and an FFT route through FFTW. kAuto
// picks the FFT for d >= kFftThreshold. Under the FFT route conv(a, b) and
// conv(b, a) are bit-identical.

#include <cstddef>
#include <span>
#include <vector>

namespace cbl::hrr {

enum class ConvMethod { kAuto, kDirect, kFft };

inline constexpr std::size_t kFftThreshold = 64;

// Throws DomainError on size mismatch.
std::vector<double> CircConv(std::span<const double> a,
                             std::span<const double> b,
                             ConvMethod method = ConvMethod::kAuto);
void CircConvInto(std::span<const double> a, std::span<const double> b,
                  std::span<double> out, ConvMethod method = ConvMethod::kAuto);

std::vector<double> CircCorr(std::span<const double> a,
                             std::span<const double> b,
                             ConvMethod method = ConvMethod::kAuto);
// out += corr(a, b)
void CircCorrAcc(std::span<const double> a, std::span<const double> b,
                 std::span<double> out, ConvMethod method = ConvMethod::kAuto);

std::vector<double> Involution(std::span<const double> a);

}  // namespace cbl::hrr

#endif  // CBL_CIRCULAR_H_
