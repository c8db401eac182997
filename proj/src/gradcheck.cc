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

#include "cbl/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cbl/kernels.h"
#include "cbl/rng.h"
#include "cbl/scenegen.h"
#include "cbl/train.h"

namespace cbl {
namespace {

double RelError(double a, double n) {
  return std::fabs(a - n) / std::max({1.0, std::fabs(a), std::fabs(n)});
}

void Perturb(ComposerParams& p, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(p.dim)));
  for (double& v : p.data) v += g(rng);
}

Phrase RandomPhrase(const std::vector<Phrase>& universe, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, universe.size() - 1);
  return universe[pick(rng)];
}

}  // namespace

GradCheckResult CheckGradients(ModelKind model, DatasetKind kind,
                               std::size_t dim, const GradCheckOptions& opts) {
  GradCheckResult result;
  const Vocabulary vocab = VocabularyFor(kind);
  const std::vector<Phrase> universe = ClassUniverse(kind);
  Rng rng = MakeRng(opts.seed, Stream::kInit, static_cast<uint64_t>(model));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = opts.step;

  TrainConfig tc;
  tc.dim = dim;
  tc.weight_decay = 1e-2;

  for (std::size_t t = 0; t < opts.trials; ++t) {
    ComposerParams params = InitParams(model, vocab, dim, rng());
    Perturb(params, rng);
    const Phrase phrase = RandomPhrase(universe, rng);
    std::vector<double> upstream(dim);
    for (double& u : upstream) u = gauss(rng);

    Gradients grads(params);
    Backward(params, phrase, upstream, grads);
    auto objective = [&](const ComposerParams& p) {
      return kernels::Dot(upstream, Compose(p, phrase));
    };
    for (std::size_t b = 0; b < params.layout.blocks.size(); ++b) {
      if (!grads.touched[b]) continue;
      const ParamBlock& block = params.layout.blocks[b];
      for (std::size_t i = block.offset; i < block.offset + block.size(); ++i) {
        const double saved = params.data[i];
        params.data[i] = saved + h;
        const double up = objective(params);
        params.data[i] = saved - h;
        const double down = objective(params);
        params.data[i] = saved;
        result.max_rel_error = std::max(
            result.max_rel_error, RelError(grads.data[i], (up - down) / (2 * h)));
        ++result.coordinates;
      }
    }

    if (opts.check_loss) {
      std::vector<double> image(dim);
      for (double& v : image) v = gauss(rng);
      std::vector<Phrase> negatives;
      for (const Phrase& p : universe) {
        if (p != phrase && negatives.size() < kNumDistractors) negatives.push_back(p);
      }
      const LossResult lr = LossExample(image, phrase, negatives, params, tc);
      auto loss = [&](const ComposerParams& p) {
        return LossExample(image, phrase, negatives, p, tc).loss;
      };
      for (std::size_t b = 0; b < params.layout.blocks.size(); ++b) {
        if (!lr.grads.touched[b]) continue;
        const ParamBlock& block = params.layout.blocks[b];
        // The loss is costlier; sample a few coordinates per block.
        const std::size_t stride = std::max<std::size_t>(1, block.size() / 8);
        for (std::size_t i = block.offset; i < block.offset + block.size();
             i += stride) {
          const double saved = params.data[i];
          params.data[i] = saved + h;
          const double up = loss(params);
          params.data[i] = saved - h;
          const double down = loss(params);
          params.data[i] = saved;
          result.max_loss_rel_error =
              std::max(result.max_loss_rel_error,
                       RelError(lr.grads.data[i], (up - down) / (2 * h)));
        }
      }
    }
    ++result.trials;
  }
  return result;
}

}  // namespace cbl
