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

#ifndef CBL_GRADCHECK_H_
#define CBL_GRADCHECK_H_

// Central finite-difference checks of the analytic composition and loss
// gradients.

#include <cstddef>
#include <cstdint>

#include "cbl/compose.h"
#include "cbl/scene.h"

namespace cbl {

struct GradCheckOptions {
  std::size_t trials = 100;
  double step = 1e-6;
  uint64_t seed = 1;
  // Also check the full training loss (with weight decay) per trial.
  bool check_loss = true;
};

struct GradCheckResult {
  std::size_t trials = 0;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;  // composition, |a - n| / max(1, |a|, |n|)
  double max_loss_rel_error = 0.0;
};

// Random parameters, phrase and upstream vector per trial; every coordinate
// of every block the phrase touches is perturbed.
GradCheckResult CheckGradients(ModelKind model, DatasetKind kind,
                               std::size_t dim, const GradCheckOptions& opts);

}  // namespace cbl

#endif  // CBL_GRADCHECK_H_
