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

#ifndef CBL_EVAL_H_
#define CBL_EVAL_H_

// Top-1 accuracy over 5-candidate sets, error taxonomies, and calibrated
// stacking for seen/unseen class bias.

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cbl/scene.h"

namespace cbl {

// Scores within this distance of the maximum count as tied.
inline constexpr double kTieTolerance = 1e-9;

enum class TiePolicy : uint8_t { kLowestIndex, kAdversarial, kRandom };

struct TieBreak {
  TiePolicy policy = TiePolicy::kLowestIndex;
  uint64_t seed = 0;  // kRandom only
};

// "lowest_index", "adversarial", "random" or "random:<seed>". ConfigError.
TieBreak ParseTieBreak(std::string_view text);
std::string TieBreakName(const TieBreak& t);

struct Prediction {
  std::string id;
  std::array<Phrase, kNumCandidates> candidates;
  std::array<double, kNumCandidates> scores{};
  int true_index = 0;
  int predicted = 0;
  bool tie = false;  // top score reached by >= 2 candidates

  bool correct() const { return predicted == true_index; }
  const Phrase& predicted_phrase() const { return candidates[predicted]; }
  const Phrase& true_phrase() const { return candidates[true_index]; }
};

// Resolves the argmax under `tie`. Adversarial picks a wrong candidate
// whenever the true one is tied for the top; random draws uniformly among
// the tied candidates from a stream keyed on the example id, so the outcome
// does not depend on evaluation order.
Prediction MakePrediction(std::string id,
                          const std::array<Phrase, kNumCandidates>& candidates,
                          const std::array<double, kNumCandidates>& scores,
                          const TieBreak& tie, int true_index = 0);

// Throws ContractError when a candidate list does not have 5 entries.
Prediction MakePrediction(std::string id, std::span<const Phrase> candidates,
                          std::span<const double> scores, const TieBreak& tie,
                          int true_index = 0);

// Re-resolves the argmax of an existing prediction with its stored scores.
Prediction Resolve(const Prediction& p, const TieBreak& tie);

struct SplitAccuracy {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
  double tie_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(ties) / total;
  }
};

SplitAccuracy EvaluateSplit(std::span<const Prediction> predictions);

enum class AdjNounError : uint8_t { kAdj, kNoun, kBoth };
enum class RelationalError : uint8_t { kBRA, kASB, kARC, kCRB };

std::string_view AdjNounErrorName(AdjNounError e);
std::string_view RelationalErrorName(RelationalError e);

// Throws ContractError when predicted == true or either is not AdjNoun.
AdjNounError ClassifyAdjNounError(const Phrase& predicted,
                                  const Phrase& truth);
// For true aRb: bRa, aSb (S = opposite R), aRc, cRb. ContractError when the
// prediction is not among `candidates` or fits none of the four slots.
RelationalError ClassifyRelationalError(const Phrase& predicted,
                                        const Phrase& truth,
                                        std::span<const Phrase> candidates);

struct ErrorTaxonomy {
  bool relational = false;
  // Adj/Noun/Both in slots 0..2, or bRa/aSb/aRc/cRb in 0..3.
  std::array<std::size_t, 4> counts{};

  std::size_t errors() const;
  // Percent of errors per slot; empty when there are no errors.
  std::vector<double> Percentages() const;
  void Merge(const ErrorTaxonomy& other);
};

ErrorTaxonomy TallyErrors(std::span<const Prediction> predictions,
                          bool relational);

inline constexpr int kCalibrationSteps = 100;  // per side of zero
inline constexpr int kCalibrationGridSize = 2 * kCalibrationSteps + 1;

struct CalibrationResult {
  double gamma = 0.0;
  double seen_accuracy = 0.0;
  double unseen_accuracy = 0.0;
  double harmonic_mean = 0.0;
  double l_max = 0.0;
  std::vector<double> grid;
};

double HarmonicMean(double a, double b);

// gamma_k = l_max * (k - 100) / 100 for k = 0..200, where l_max is the
// highest candidate score over both sets. Picks the gamma with the highest
// harmonic mean of seen and unseen accuracy after subtracting gamma from
// every seen-class candidate; ties go to the smallest |gamma|, then the
// smallest gamma. l_max == 0 yields gamma = 0.
CalibrationResult Calibrate(std::span<const Prediction> seen_val,
                            std::span<const Prediction> unseen_val,
                            const std::set<Phrase>& seen_classes,
                            const TieBreak& tie = {});

// Subtracts gamma from the score of every candidate in `seen_classes` and
// recomputes the argmax.
std::vector<Prediction> ApplyCalibration(std::span<const Prediction> predictions,
                                         double gamma,
                                         const std::set<Phrase>& seen_classes,
                                         const TieBreak& tie = {});

}  // namespace cbl

#endif  // CBL_EVAL_H_
