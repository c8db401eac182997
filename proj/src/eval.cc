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

#include "cbl/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbl/errors.h"
#include "cbl/rng.h"

namespace cbl {
namespace {

uint64_t HashId(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ResolveInPlace(Prediction& p, const TieBreak& tie) {
  double top = -std::numeric_limits<double>::infinity();
  for (double s : p.scores) top = std::max(top, s);
  std::array<int, kNumCandidates> tied{};
  int n_tied = 0;
  for (int k = 0; k < kNumCandidates; ++k) {
    if (p.scores[k] >= top - kTieTolerance) tied[n_tied++] = k;
  }
  p.tie = n_tied >= 2;
  switch (tie.policy) {
    case TiePolicy::kLowestIndex:
      p.predicted = tied[0];
      break;
    case TiePolicy::kAdversarial: {
      p.predicted = tied[0];
      for (int i = 0; i < n_tied; ++i) {
        if (tied[i] != p.true_index) {
          p.predicted = tied[i];
          break;
        }
      }
      break;
    }
    case TiePolicy::kRandom: {
      if (n_tied == 1) {
        p.predicted = tied[0];
      } else {
        Rng rng = MakeRng(tie.seed, Stream::kTieBreak, HashId(p.id));
        p.predicted = tied[std::uniform_int_distribution<int>(0, n_tied - 1)(rng)];
      }
      break;
    }
  }
}

}  // namespace

TieBreak ParseTieBreak(std::string_view text) {
  if (text == "lowest_index") return {TiePolicy::kLowestIndex, 0};
  if (text == "adversarial") return {TiePolicy::kAdversarial, 0};
  if (text == "random") return {TiePolicy::kRandom, 0};
  if (text.rfind("random:", 0) == 0) {
    const std::string digits(text.substr(7));
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(digits.c_str(), &end, 10);
    if (!digits.empty() && *end == '\0') {
      return {TiePolicy::kRandom, static_cast<uint64_t>(seed)};
    }
  }
  throw ConfigError("unknown tie policy '" + std::string(text) + "'");
}

std::string TieBreakName(const TieBreak& t) {
  switch (t.policy) {
    case TiePolicy::kLowestIndex: return "lowest_index";
    case TiePolicy::kAdversarial: return "adversarial";
    case TiePolicy::kRandom: return "random:" + std::to_string(t.seed);
  }
  return "?";
}

Prediction MakePrediction(std::string id,
                          const std::array<Phrase, kNumCandidates>& candidates,
                          const std::array<double, kNumCandidates>& scores,
                          const TieBreak& tie, int true_index) {
  Prediction p;
  p.id = std::move(id);
  p.candidates = candidates;
  p.scores = scores;
  p.true_index = true_index;
  ResolveInPlace(p, tie);
  return p;
}

Prediction MakePrediction(std::string id, std::span<const Phrase> candidates,
                          std::span<const double> scores, const TieBreak& tie,
                          int true_index) {
  if (candidates.size() != kNumCandidates || scores.size() != kNumCandidates) {
    throw ContractError("expected 5 candidates, got " +
                        std::to_string(candidates.size()));
  }
  if (true_index < 0 || true_index >= kNumCandidates) {
    throw ContractError("true index out of range");
  }
  std::array<Phrase, kNumCandidates> c;
  std::array<double, kNumCandidates> s;
  std::copy(candidates.begin(), candidates.end(), c.begin());
  std::copy(scores.begin(), scores.end(), s.begin());
  return MakePrediction(std::move(id), c, s, tie, true_index);
}

Prediction Resolve(const Prediction& p, const TieBreak& tie) {
  Prediction out = p;
  ResolveInPlace(out, tie);
  return out;
}

SplitAccuracy EvaluateSplit(std::span<const Prediction> predictions) {
  SplitAccuracy acc;
  for (const Prediction& p : predictions) {
    ++acc.total;
    if (p.correct()) ++acc.correct;
    if (p.tie) ++acc.ties;
  }
  return acc;
}

std::string_view AdjNounErrorName(AdjNounError e) {
  switch (e) {
    case AdjNounError::kAdj: return "Adj";
    case AdjNounError::kNoun: return "Noun";
    case AdjNounError::kBoth: return "Both";
  }
  return "?";
}

std::string_view RelationalErrorName(RelationalError e) {
  switch (e) {
    case RelationalError::kBRA: return "bRa";
    case RelationalError::kASB: return "aSb";
    case RelationalError::kARC: return "aRc";
    case RelationalError::kCRB: return "cRb";
  }
  return "?";
}

AdjNounError ClassifyAdjNounError(const Phrase& predicted,
                                  const Phrase& truth) {
  const auto* p = std::get_if<AdjNoun>(&predicted);
  const auto* t = std::get_if<AdjNoun>(&truth);
  if (p == nullptr || t == nullptr) {
    throw ContractError("adjective-noun taxonomy needs adjective-noun phrases");
  }
  if (*p == *t) throw ContractError("prediction is correct, not an error");
  if (p->noun == t->noun) return AdjNounError::kAdj;
  if (p->adjective == t->adjective) return AdjNounError::kNoun;
  return AdjNounError::kBoth;
}

RelationalError ClassifyRelationalError(const Phrase& predicted,
                                        const Phrase& truth,
                                        std::span<const Phrase> candidates) {
  if (std::find(candidates.begin(), candidates.end(), predicted) ==
      candidates.end()) {
    throw ContractError("prediction '" + PhraseToString(predicted) +
                        "' is not a candidate");
  }
  const auto* p = std::get_if<Rel>(&predicted);
  const auto* t = std::get_if<Rel>(&truth);
  if (p == nullptr || t == nullptr) {
    throw ContractError("relational taxonomy needs relational phrases");
  }
  const Rel& r = *t;
  if (*p == Rel{r.object, r.relation, r.subject}) return RelationalError::kBRA;
  if (*p == Rel{r.subject, Opposite(r.relation), r.object}) {
    return RelationalError::kASB;
  }
  if (p->subject == r.subject && p->relation == r.relation &&
      p->object != r.object && p->object != r.subject) {
    return RelationalError::kARC;
  }
  if (p->object == r.object && p->relation == r.relation &&
      p->subject != r.subject && p->subject != r.object) {
    return RelationalError::kCRB;
  }
  throw ContractError("'" + PhraseToString(predicted) +
                      "' fits no distractor slot of '" + PhraseToString(truth) +
                      "'");
}

std::size_t ErrorTaxonomy::errors() const {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  return n;
}

std::vector<double> ErrorTaxonomy::Percentages() const {
  const std::size_t n = errors();
  if (n == 0) return {};
  const std::size_t slots = relational ? 4 : 3;
  std::vector<double> out(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return out;
}

void ErrorTaxonomy::Merge(const ErrorTaxonomy& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ErrorTaxonomy TallyErrors(std::span<const Prediction> predictions,
                          bool relational) {
  ErrorTaxonomy tax;
  tax.relational = relational;
  for (const Prediction& p : predictions) {
    if (p.correct()) continue;
    const std::size_t slot =
        relational ? static_cast<std::size_t>(ClassifyRelationalError(
                         p.predicted_phrase(), p.true_phrase(), p.candidates))
                   : static_cast<std::size_t>(ClassifyAdjNounError(
                         p.predicted_phrase(), p.true_phrase()));
    ++tax.counts[slot];
  }
  return tax;
}

double HarmonicMean(double a, double b) {
  return (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

std::vector<Prediction> ApplyCalibration(std::span<const Prediction> predictions,
                                         double gamma,
                                         const std::set<Phrase>& seen_classes,
                                         const TieBreak& tie) {
  std::vector<Prediction> out;
  out.reserve(predictions.size());
  for (const Prediction& p : predictions) {
    Prediction q = p;
    for (int k = 0; k < kNumCandidates; ++k) {
      if (seen_classes.count(q.candidates[k])) q.scores[k] -= gamma;
    }
    ResolveInPlace(q, tie);
    out.push_back(std::move(q));
  }
  return out;
}

CalibrationResult Calibrate(std::span<const Prediction> seen_val,
                            std::span<const Prediction> unseen_val,
                            const std::set<Phrase>& seen_classes,
                            const TieBreak& tie) {
  if (seen_val.empty() || unseen_val.empty()) {
    throw ContractError("calibration needs seen and unseen predictions");
  }
  CalibrationResult result;
  double l_max = -std::numeric_limits<double>::infinity();
  for (auto set : {seen_val, unseen_val}) {
    for (const Prediction& p : set) {
      for (double s : p.scores) l_max = std::max(l_max, s);
    }
  }
  result.l_max = l_max;
  const auto evaluate = [&](double gamma, CalibrationResult& r) {
    const auto seen = ApplyCalibration(seen_val, gamma, seen_classes, tie);
    const auto unseen = ApplyCalibration(unseen_val, gamma, seen_classes, tie);
    r.gamma = gamma;
    r.seen_accuracy = EvaluateSplit(seen).accuracy();
    r.unseen_accuracy = EvaluateSplit(unseen).accuracy();
    r.harmonic_mean = HarmonicMean(r.seen_accuracy, r.unseen_accuracy);
  };
  if (l_max == 0.0) {
    evaluate(0.0, result);
    result.grid.assign(kCalibrationGridSize, 0.0);
    return result;
  }
  result.grid.reserve(kCalibrationGridSize);
  bool have_best = false;
  for (int k = 0; k < kCalibrationGridSize; ++k) {
    const double gamma =
        l_max * static_cast<double>(k - kCalibrationSteps) / kCalibrationSteps;
    result.grid.push_back(gamma);
    CalibrationResult candidate;
    evaluate(gamma, candidate);
    bool better = !have_best;
    if (have_best) {
      if (candidate.harmonic_mean != result.harmonic_mean) {
        better = candidate.harmonic_mean > result.harmonic_mean;
      } else if (std::abs(gamma) != std::abs(result.gamma)) {
        better = std::abs(gamma) < std::abs(result.gamma);
      } else {
        better = gamma < result.gamma;
      }
    }
    if (better) {
      std::vector<double> grid = std::move(result.grid);
      result = candidate;
      result.grid = std::move(grid);
      result.l_max = l_max;
      have_best = true;
    }
  }
  return result;
}

}  // namespace cbl
