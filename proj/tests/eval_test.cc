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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cbl/errors.h"
#include "cbl/scenegen.h"

namespace cbl {
namespace {

using Scores = std::array<double, kNumCandidates>;
using Cands = std::array<Phrase, kNumCandidates>;

Phrase AN(Color c, Shape s) { return AdjNoun{c, s}; }
Phrase R(Shape a, RelationKind r, Shape b) { return Rel{a, r, b}; }

Cands SomeCandidates() {
  return {AN(Color::kRed, Shape::kCube), AN(Color::kRed, Shape::kSphere),
          AN(Color::kYellow, Shape::kCube), AN(Color::kBlue, Shape::kCylinder),
          AN(Color::kGray, Shape::kSphere)};
}

TEST(MakePrediction, StrictArgmax) {
  const Prediction p = MakePrediction("x", SomeCandidates(), Scores{5, 1, 1, 1, 1}, {});
  EXPECT_TRUE(p.correct());
  EXPECT_FALSE(p.tie);
}

TEST(MakePrediction, TiePolicies) {
  const Scores s{3, 3, 1, 0, -1};
  const Prediction low = MakePrediction("x", SomeCandidates(), s, {TiePolicy::kLowestIndex, 0});
  EXPECT_TRUE(low.tie);
  EXPECT_TRUE(low.correct());
  const Prediction adv = MakePrediction("x", SomeCandidates(), s, {TiePolicy::kAdversarial, 0});
  EXPECT_TRUE(adv.tie);
  EXPECT_FALSE(adv.correct());
  EXPECT_EQ(adv.predicted, 1);
  // Within 1e-9 counts as a tie.
  const Prediction near = MakePrediction("x", SomeCandidates(), Scores{3, 3 + 5e-10, 0, 0, 0},
                                         {TiePolicy::kAdversarial, 0});
  EXPECT_TRUE(near.tie);
  EXPECT_FALSE(near.correct());
  const Prediction apart = MakePrediction("x", SomeCandidates(), Scores{3, 3 - 1e-8, 0, 0, 0},
                                          {TiePolicy::kAdversarial, 0});
  EXPECT_FALSE(apart.tie);
  EXPECT_TRUE(apart.correct());
}

TEST(MakePrediction, RandomPolicyIsKeyedAndFair) {
  const Scores s{2, 2, 0, 0, 0};
  int wins = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::string id = "ex-" + std::to_string(i);
    const Prediction a = MakePrediction(id, SomeCandidates(), s, {TiePolicy::kRandom, 7});
    const Prediction b = MakePrediction(id, SomeCandidates(), s, {TiePolicy::kRandom, 7});
    EXPECT_EQ(a.predicted, b.predicted);
    EXPECT_LE(a.predicted, 1);
    wins += a.correct();
  }
  EXPECT_NEAR(wins / 2000.0, 0.5, 0.05);
}

TEST(MakePrediction, CandidateCountContract) {
  const Cands all = SomeCandidates();
  const std::vector<Phrase> four(all.begin(), all.begin() + 4);
  const std::vector<double> scores(4, 0.0);
  EXPECT_THROW(MakePrediction("x", four, scores, {}), ContractError);
}

TEST(TieBreak, ParseAndName) {
  EXPECT_EQ(ParseTieBreak("adversarial").policy, TiePolicy::kAdversarial);
  const TieBreak r = ParseTieBreak("random:42");
  EXPECT_EQ(r.policy, TiePolicy::kRandom);
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(TieBreakName(r), "random:42");
  EXPECT_EQ(TieBreakName(ParseTieBreak("lowest_index")), "lowest_index");
  EXPECT_THROW(ParseTieBreak("coin"), ConfigError);
}

TEST(Taxonomy, AdjNounClassifier) {
  const Phrase t = AN(Color::kRed, Shape::kCube);
  EXPECT_EQ(ClassifyAdjNounError(AN(Color::kYellow, Shape::kCube), t), AdjNounError::kAdj);
  EXPECT_EQ(ClassifyAdjNounError(AN(Color::kRed, Shape::kSphere), t), AdjNounError::kNoun);
  EXPECT_EQ(ClassifyAdjNounError(AN(Color::kBlue, Shape::kCylinder), t), AdjNounError::kBoth);
  EXPECT_THROW(ClassifyAdjNounError(t, t), ContractError);
}

TEST(Taxonomy, RelationalClassifier) {
  const Phrase t = R(Shape::kCube, RelationKind::kLeft, Shape::kSphere);
  const std::vector<Phrase> cands = {t, R(Shape::kSphere, RelationKind::kLeft, Shape::kCube),
                                     R(Shape::kCube, RelationKind::kRight, Shape::kSphere),
                                     R(Shape::kCube, RelationKind::kLeft, Shape::kCylinder),
                                     R(Shape::kCylinder, RelationKind::kLeft, Shape::kSphere)};
  EXPECT_EQ(ClassifyRelationalError(cands[1], t, cands), RelationalError::kBRA);
  EXPECT_EQ(ClassifyRelationalError(cands[2], t, cands), RelationalError::kASB);
  EXPECT_EQ(ClassifyRelationalError(cands[3], t, cands), RelationalError::kARC);
  EXPECT_EQ(ClassifyRelationalError(cands[4], t, cands), RelationalError::kCRB);
  EXPECT_THROW(ClassifyRelationalError(R(Shape::kSphere, RelationKind::kFront, Shape::kCube), t,
                                       cands),
               ContractError);
}

TEST(Taxonomy, TotalOverGeneratedErrors) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (DatasetKind k : {DatasetKind::kSingle, DatasetKind::kTwo, DatasetKind::kRelational}) {
    const DatasetManifest m = BuildDataset(k, {200, 0, 0}, 4);
    std::vector<Prediction> preds;
    for (const Example& ex : m.Examples(Split::kTrain)) {
      Scores s;
      for (double& x : s) x = u(rng);
      preds.push_back(MakePrediction(ex.id, ex.Candidates(), s, {}));
    }
    const ErrorTaxonomy t = TallyErrors(preds, k == DatasetKind::kRelational);
    const auto wrong = std::count_if(preds.begin(), preds.end(),
                                     [](const Prediction& p) { return !p.correct(); });
    EXPECT_EQ(t.errors(), static_cast<std::size_t>(wrong));
    double sum = 0.0;
    for (double p : t.Percentages()) sum += p;
    EXPECT_NEAR(sum, 100.0, 0.1);
  }
  EXPECT_TRUE(ErrorTaxonomy{}.Percentages().empty());
}

TEST(EvaluateSplit, PermutationInvariant) {
  const DatasetManifest m = BuildDataset(DatasetKind::kTwo, {100, 0, 0}, 5);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, 3);
  std::vector<Prediction> preds;
  for (const Example& ex : m.Examples(Split::kTrain)) {
    Scores s;
    for (double& x : s) x = u(rng);
    preds.push_back(MakePrediction(ex.id, ex.Candidates(), s, {TiePolicy::kRandom, 3}));
  }
  const SplitAccuracy a = EvaluateSplit(preds);
  std::shuffle(preds.begin(), preds.end(), rng);
  const SplitAccuracy b = EvaluateSplit(preds);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_EQ(a.ties, b.ties);
  EXPECT_EQ(TallyErrors(preds, false).counts, TallyErrors(preds, false).counts);
}

// Exhaustive reference for the calibration search.
struct GridBest {
  double gamma;
  double hm;
};

double Acc(const std::vector<Prediction>& preds, double gamma, const std::set<Phrase>& seen) {
  int ok = 0;
  for (const Prediction& p : preds) {
    Scores s = p.scores;
    for (int k = 0; k < kNumCandidates; ++k) {
      if (seen.count(p.candidates[k])) s[k] -= gamma;
    }
    ok += MakePrediction(p.id, p.candidates, s, {}).correct();
  }
  return static_cast<double>(ok) / preds.size();
}

GridBest Exhaustive(const std::vector<Prediction>& seen_val,
                    const std::vector<Prediction>& unseen_val, const std::set<Phrase>& seen) {
  double lmax = -INFINITY;
  for (const auto* set : {&seen_val, &unseen_val}) {
    for (const Prediction& p : *set) {
      for (double s : p.scores) lmax = std::max(lmax, s);
    }
  }
  GridBest best{0.0, -1.0};
  for (int k = 0; k <= 200; ++k) {
    const double g = lmax * (k - 100) / 100.0;
    const double a = Acc(seen_val, g, seen);
    const double b = Acc(unseen_val, g, seen);
    const double hm = a + b > 0 ? 2 * a * b / (a + b) : 0.0;
    const bool better = hm > best.hm + 1e-12 ||
                        (std::fabs(hm - best.hm) <= 1e-12 &&
                         (std::fabs(g) < std::fabs(best.gamma) ||
                          (std::fabs(g) == std::fabs(best.gamma) && g < best.gamma)));
    if (best.hm < 0 || better) best = {g, hm};
  }
  return best;
}

struct CalSet {
  std::vector<Prediction> seen_val, unseen_val;
  std::set<Phrase> seen;
};

// Seen candidates are AN(*, cube); unseen are AN(*, sphere).
CalSet Synthetic(std::mt19937_64& rng, double bias) {
  CalSet c;
  for (int i = 0; i < 8; ++i) c.seen.insert(AN(static_cast<Color>(i), Shape::kCube));
  std::normal_distribution<double> g(0.0, 0.5);
  auto cands = [](Shape truth_shape, int color) {
    Cands out;
    out[0] = AN(static_cast<Color>(color), truth_shape);
    for (int k = 1; k < kNumCandidates; ++k) {
      out[k] = AN(static_cast<Color>((color + k) % 8), k % 2 ? Shape::kCube : Shape::kSphere);
    }
    return out;
  };
  for (int i = 0; i < 60; ++i) {
    Scores s;
    const Cands cs = cands(Shape::kCube, i % 8);
    for (int k = 0; k < kNumCandidates; ++k) {
      s[k] = 1.0 + g(rng) + (k == 0 ? 0.6 : 0.0) + (c.seen.count(cs[k]) ? bias : 0.0);
    }
    c.seen_val.push_back(MakePrediction("s" + std::to_string(i), cs, s, {}));
    Scores t;
    const Cands cu = cands(Shape::kSphere, i % 8);
    for (int k = 0; k < kNumCandidates; ++k) {
      t[k] = 1.0 + g(rng) + (k == 0 ? 0.6 : 0.0) + (c.seen.count(cu[k]) ? bias : 0.0);
    }
    c.unseen_val.push_back(MakePrediction("u" + std::to_string(i), cu, t, {}));
  }
  return c;
}

TEST(Calibrate, GridHas201Points) {
  std::mt19937_64 rng(1);
  const CalSet c = Synthetic(rng, 0.5);
  const CalibrationResult r = Calibrate(c.seen_val, c.unseen_val, c.seen);
  ASSERT_EQ(r.grid.size(), 201u);
  EXPECT_DOUBLE_EQ(r.grid.front(), -r.l_max);
  EXPECT_DOUBLE_EQ(r.grid.back(), r.l_max);
  EXPECT_DOUBLE_EQ(r.grid[100], 0.0);
}

TEST(Calibrate, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(2);
  for (double bias : {0.0, 0.3, 0.8, 1.5, -0.4}) {
    for (int rep = 0; rep < 5; ++rep) {
      const CalSet c = Synthetic(rng, bias);
      const CalibrationResult r = Calibrate(c.seen_val, c.unseen_val, c.seen);
      const GridBest o = Exhaustive(c.seen_val, c.unseen_val, c.seen);
      EXPECT_DOUBLE_EQ(r.gamma, o.gamma) << bias;
      EXPECT_NEAR(r.harmonic_mean, o.hm, 1e-12);
    }
  }
}

TEST(Calibrate, HandConstructedCase) {
  // Unseen true scores 1.5 against a seen distractor at 2.0; seen split
  // already perfect with margin 1.0. At gamma 0.5 the two tie and lowest
  // index resolves the tie toward the true label.
  const Phrase seen_a = AN(Color::kRed, Shape::kCube);
  const Phrase seen_b = AN(Color::kBlue, Shape::kCube);
  const Phrase unseen = AN(Color::kRed, Shape::kSphere);
  const Phrase filler1 = AN(Color::kCyan, Shape::kSphere);
  const Phrase filler2 = AN(Color::kGray, Shape::kSphere);
  const Phrase filler3 = AN(Color::kGreen, Shape::kSphere);
  const std::set<Phrase> seen = {seen_a, seen_b};
  std::vector<Prediction> sv, uv;
  for (int i = 0; i < 4; ++i) {
    sv.push_back(MakePrediction("s" + std::to_string(i), {seen_a, seen_b, filler1, filler2, filler3},
                                Scores{2.0, 1.0, 0.0, 0.0, 0.0}, {}));
    uv.push_back(MakePrediction("u" + std::to_string(i), {unseen, seen_b, filler1, filler2, filler3},
                                Scores{1.5, 2.0, 0.0, 0.0, 0.0}, {}));
  }
  const CalibrationResult r = Calibrate(sv, uv, seen);
  EXPECT_NEAR(r.gamma, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(r.harmonic_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.gamma, Exhaustive(sv, uv, seen).gamma);
}

TEST(Calibrate, AlreadyOptimalPicksZero) {
  const Phrase seen_a = AN(Color::kRed, Shape::kCube);
  const Phrase unseen = AN(Color::kRed, Shape::kSphere);
  const Phrase f1 = AN(Color::kCyan, Shape::kSphere);
  const Phrase f2 = AN(Color::kGray, Shape::kSphere);
  const Phrase f3 = AN(Color::kGreen, Shape::kSphere);
  const std::set<Phrase> seen = {seen_a};
  const std::vector<Prediction> sv = {
      MakePrediction("s", {seen_a, unseen, f1, f2, f3}, Scores{2, 1.9, 0, 0, 0}, {})};
  const std::vector<Prediction> uv = {
      MakePrediction("u", {unseen, seen_a, f1, f2, f3}, Scores{2, 1.9, 0, 0, 0}, {})};
  EXPECT_EQ(Calibrate(sv, uv, seen).gamma, 0.0);
}

TEST(Calibrate, ZeroLmaxIsDegenerate) {
  const std::set<Phrase> seen = {AN(Color::kRed, Shape::kCube)};
  const std::vector<Prediction> sv = {MakePrediction("s", SomeCandidates(), Scores{0, 0, 0, 0, 0}, {})};
  EXPECT_EQ(Calibrate(sv, sv, seen).gamma, 0.0);
}

TEST(ApplyCalibration, Properties) {
  std::mt19937_64 rng(4);
  const CalSet c = Synthetic(rng, 0.7);
  const auto zero = ApplyCalibration(c.unseen_val, 0.0, c.seen);
  for (std::size_t i = 0; i < zero.size(); ++i) {
    EXPECT_EQ(zero[i].scores, c.unseen_val[i].scores);
    EXPECT_EQ(zero[i].predicted, c.unseen_val[i].predicted);
  }
  const auto shifted = ApplyCalibration(c.unseen_val, 0.25, c.seen);
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    for (int k = 0; k < kNumCandidates; ++k) {
      if (c.seen.count(c.unseen_val[i].candidates[k])) {
        EXPECT_EQ(shifted[i].scores[k], c.unseen_val[i].scores[k] - 0.25);
      } else {
        EXPECT_EQ(shifted[i].scores[k], c.unseen_val[i].scores[k]);
      }
    }
  }
  const auto huge = ApplyCalibration(c.unseen_val, 1e6, c.seen);
  for (const Prediction& p : huge) EXPECT_FALSE(c.seen.count(p.predicted_phrase()));
}

TEST(Calibrate, RaisesUnseenAccuracyOnSeenBiasedScores) {
  std::mt19937_64 rng(6);
  const CalSet c = Synthetic(rng, 1.0);
  const CalibrationResult r = Calibrate(c.seen_val, c.unseen_val, c.seen);
  const double before = EvaluateSplit(c.unseen_val).accuracy();
  const double after = EvaluateSplit(ApplyCalibration(c.unseen_val, r.gamma, c.seen)).accuracy();
  EXPECT_GT(after, before);
}

TEST(HarmonicMean, Basics) {
  EXPECT_DOUBLE_EQ(HarmonicMean(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(HarmonicMean(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(HarmonicMean(0.0, 0.0), 0.0);
  EXPECT_NEAR(HarmonicMean(0.5, 1.0), 2.0 / 3.0, 1e-15);
}

}  // namespace
}  // namespace cbl
