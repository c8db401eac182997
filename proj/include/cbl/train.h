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

#ifndef CBL_TRAIN_H_
#define CBL_TRAIN_H_

// Contrastive training of a composition model against frozen image
// embeddings: softmax cross-entropy of the true phrase against distractor
// phrases, an L2 penalty on the parameters each step touches, and Adam.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cbl/compose.h"
#include "cbl/embed.h"
#include "cbl/eval.h"
#include "cbl/scenegen.h"

namespace cbl {

// kStandard: -log(exp(l_pos) / (exp(l_pos) + sum_neg exp(l_neg))).
// kLiteral:  -log(exp(l_pos) / exp(l_pos + sum_neg l_neg)) = sum_neg l_neg,
//            kept only to audit the printed variant; it is unbounded below.
enum class SoftmaxForm : uint8_t { kStandard, kLiteral };

struct TrainConfig {
  double learning_rate = 5e-4;
  double weight_decay = 1e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  // 0 = every in-split class that does not describe the image.
  std::size_t negatives = 0;
  std::size_t seeds = 5;
  bool score_normalization = true;
  double logit_scale = kDefaultLogitScale;
  std::size_t dim = kDefaultDim;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  SoftmaxForm softmax = SoftmaxForm::kStandard;
  TieBreak tie;

  // Throws ConfigError on non-positive values.
  void Validate() const;
};

// logit_scale * cos(image, phrase) when normalizing, else the raw dot
// product. DomainError on a zero vector under normalization.
double Score(std::span<const double> image, std::span<const double> phrase,
             const TrainConfig& cfg);

struct LossResult {
  double loss = 0.0;
  Gradients grads;
};

// Loss and gradient for one image with its true phrase and negatives,
// including weight_decay * sum of squared parameters over touched blocks.
LossResult LossExample(std::span<const double> image, const Phrase& true_phrase,
                       std::span<const Phrase> negatives,
                       const ComposerParams& params, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
};

// 1-based epoch with the highest validation accuracy; earliest on ties.
std::size_t SelectCheckpoint(const TrainHistory& history);

struct TrainResult {
  ComposerParams final_params;
  ComposerParams selected_params;
  std::size_t selected_epoch = 0;
  TrainHistory history;
};

// Negatives used for an example during training: the split's classes other
// than the true phrase that are false of the scene.
std::vector<Phrase> TrainingNegatives(const Example& ex,
                                      std::span<const Phrase> split_classes);

// Runs cfg.epochs epochs of shuffled mini-batch Adam on the train split and
// records train/validation accuracy after each. Deterministic in `seed`.
// ConfigError when the train split is empty or a train phrase falls outside
// the model vocabulary.
TrainResult TrainModel(ModelKind model, const DatasetManifest& manifest,
                       const EmbeddingTable& images, const TrainConfig& cfg,
                       uint64_t seed);

// Scores all 5 candidates of every example.
std::vector<Prediction> PredictSplit(const ComposerParams& params,
                                     std::span<const Example> examples,
                                     const EmbeddingTable& images,
                                     const TrainConfig& cfg,
                                     const TieBreak& tie);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Sample standard deviation over sqrt(k); 0 when k == 1.
MeanStderr Aggregate(std::span<const double> values);

struct SeedResult {
  uint64_t seed = 0;
  std::size_t selected_epoch = 0;
  TrainHistory history;
  ComposerParams params;  // selected checkpoint
  // Per split, under cfg.tie and under the adversarial policy.
  std::array<double, 3> accuracy{};
  std::array<double, 3> adversarial_accuracy{};
  std::array<double, 3> tie_rate{};
  // Relational only: true aRb scored within 1e-9 of its bRa distractor.
  std::array<double, 3> swap_tie_rate{};
  std::vector<Prediction> generalization_predictions;
};

struct RunSummary {
  ModelKind model = ModelKind::kAdd;
  std::array<MeanStderr, 3> accuracy{};
  std::array<MeanStderr, 3> adversarial_accuracy{};
  std::array<double, 3> tie_rate{};  // mean over seeds
  std::array<double, 3> swap_tie_rate{};
  ErrorTaxonomy taxonomy;           // generalization split, all seeds
  std::vector<SeedResult> seeds;
};

// Fraction of relational predictions whose true label and bRa distractor
// scores differ by at most 1e-9; 0 for other datasets.
double SwapTieRate(std::span<const Prediction> predictions);

// Trains seeds 1..cfg.seeds, evaluates each at its selected checkpoint.
RunSummary RunSeeds(ModelKind model, const DatasetManifest& manifest,
                    const EmbeddingTable& images, const TrainConfig& cfg);

}  // namespace cbl

#endif  // CBL_TRAIN_H_
