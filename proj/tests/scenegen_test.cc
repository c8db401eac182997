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

#include "cbl/scenegen.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cbl/errors.h"

namespace cbl {
namespace {

constexpr double kMargin = 0.5;

// Independent truth check written from the phrase semantics.
bool Holds(const Scene& s, const Phrase& p) {
  if (const auto* an = std::get_if<AdjNoun>(&p)) {
    return std::any_of(s.objects.begin(), s.objects.end(), [&](const SceneObject& o) {
      return o.color == an->adjective && o.shape == an->noun;
    });
  }
  const auto& r = std::get<Rel>(p);
  for (const auto& a : s.objects) {
    for (const auto& b : s.objects) {
      if (&a == &b || a.shape != r.subject || b.shape != r.object) continue;
      switch (r.relation) {
        case RelationKind::kLeft: if (a.x + kMargin <= b.x) return true; break;
        case RelationKind::kRight: if (a.x >= b.x + kMargin) return true; break;
        case RelationKind::kFront: if (a.z + kMargin <= b.z) return true; break;
        case RelationKind::kBehind: if (a.z >= b.z + kMargin) return true; break;
      }
    }
  }
  return false;
}

Phrase AN(Color c, Shape s) { return AdjNoun{c, s}; }
Phrase R(Shape a, RelationKind r, Shape b) { return Rel{a, r, b}; }

std::set<Phrase> AsSet(const std::vector<Phrase>& v) { return {v.begin(), v.end()}; }

TEST(RelationHolds, Examples) {
  Scene s;
  s.objects = {{Shape::kCube, Color::kRed, -1.5, 0.0, 0.4},
               {Shape::kSphere, Color::kBlue, 1.0, 0.0, 0.4}};
  EXPECT_TRUE(RelationHolds(s, R(Shape::kCube, RelationKind::kLeft, Shape::kSphere)));
  EXPECT_FALSE(RelationHolds(s, R(Shape::kSphere, RelationKind::kLeft, Shape::kCube)));
  EXPECT_FALSE(RelationHolds(s, R(Shape::kCylinder, RelationKind::kLeft, Shape::kCube)));
  Scene one;
  one.objects = {{Shape::kCube, Color::kRed, 0.0, 0.0, 0.5}};
  EXPECT_TRUE(RelationHolds(one, AN(Color::kRed, Shape::kCube)));
  EXPECT_FALSE(RelationHolds(one, AN(Color::kRed, Shape::kSphere)));
}

TEST(RelationHolds, MarginIsInclusive) {
  Scene s;
  s.objects = {{Shape::kCube, Color::kRed, 0.0, -0.25, 0.3},
               {Shape::kSphere, Color::kBlue, 0.0, 0.25, 0.3}};
  EXPECT_TRUE(RelationHolds(s, R(Shape::kCube, RelationKind::kFront, Shape::kSphere)));
  s.objects[1].z = 0.2499;
  EXPECT_FALSE(RelationHolds(s, R(Shape::kCube, RelationKind::kFront, Shape::kSphere)));
}

TEST(SampleScene, SingleObject) {
  Rng rng(1);
  const Scene s = SampleScene(AN(Color::kBlue, Shape::kCube), rng);
  ASSERT_EQ(s.objects.size(), 1u);
  EXPECT_EQ(s.objects[0].shape, Shape::kCube);
  EXPECT_EQ(s.objects[0].color, Color::kBlue);
}

void ExpectValidTwoObject(const Scene& s) {
  ASSERT_EQ(s.objects.size(), 2u);
  const auto& a = s.objects[0];
  const auto& b = s.objects[1];
  EXPECT_NE(a.shape, b.shape);
  EXPECT_NE(a.color, b.color);
  EXPECT_GT(std::hypot(a.x - b.x, a.z - b.z), a.size + b.size);
  for (const auto& o : s.objects) {
    EXPECT_GE(o.x, -kCoordLimit);
    EXPECT_LE(o.x, kCoordLimit);
    EXPECT_GE(o.z, -kCoordLimit);
    EXPECT_LE(o.z, kCoordLimit);
    EXPECT_GE(o.size, kMinSize);
    EXPECT_LE(o.size, kMaxSize);
  }
}

TEST(SampleScene, RelationalSeparatesOnOneAxis) {
  Rng rng(2);
  for (const Phrase& cls : ClassUniverse(DatasetKind::kRelational)) {
    for (int t = 0; t < 20; ++t) {
      const Scene s = SampleScene(cls, rng);
      ExpectValidTwoObject(s);
      EXPECT_TRUE(Holds(s, cls));
      const auto& r = std::get<Rel>(cls);
      const auto& a = s.objects[0].shape == r.subject ? s.objects[0] : s.objects[1];
      const auto& b = s.objects[0].shape == r.subject ? s.objects[1] : s.objects[0];
      if (AxisOf(r.relation) == Axis::kLateral) {
        EXPECT_LT(std::fabs(a.z - b.z), kMargin);
      } else {
        EXPECT_LT(std::fabs(a.x - b.x), kMargin);
      }
      // Exactly one unordered pair-relation pair holds: the class and its
      // equivalent with swapped arguments.
      int holding = 0;
      for (const Phrase& q : ClassUniverse(DatasetKind::kRelational)) {
        holding += Holds(s, q);
      }
      EXPECT_EQ(holding, 2);
    }
  }
}

TEST(SampleScene, TwoObjectPair) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Scene s = SampleTwoObjectScene(AdjNoun{Color::kRed, Shape::kCube},
                                         AdjNoun{Color::kYellow, Shape::kSphere}, rng);
    ExpectValidTwoObject(s);
    EXPECT_TRUE(Holds(s, AN(Color::kRed, Shape::kCube)));
    EXPECT_TRUE(Holds(s, AN(Color::kYellow, Shape::kSphere)));
  }
}

TEST(MakeDistractors, TwoObjectSwapsAttributes) {
  Rng rng(4);
  const Scene s = SampleTwoObjectScene(AdjNoun{Color::kRed, Shape::kCube},
                                       AdjNoun{Color::kYellow, Shape::kSphere}, rng);
  const auto d = MakeDistractors(DatasetKind::kTwo, AN(Color::kRed, Shape::kCube), s, rng);
  const std::set<Phrase> got(d.begin(), d.end());
  EXPECT_EQ(got.size(), 4u);
  EXPECT_TRUE(got.count(AN(Color::kRed, Shape::kSphere)));
  EXPECT_TRUE(got.count(AN(Color::kYellow, Shape::kCube)));
  EXPECT_FALSE(got.count(AN(Color::kYellow, Shape::kSphere)));
  EXPECT_FALSE(got.count(AN(Color::kRed, Shape::kCube)));
}

TEST(MakeDistractors, RelationalSet) {
  Rng rng(5);
  const Phrase truth = R(Shape::kCylinder, RelationKind::kLeft, Shape::kCube);
  const Scene s = SampleScene(truth, rng);
  const auto d = MakeDistractors(DatasetKind::kRelational, truth, s, rng);
  const std::set<Phrase> expected = {
      R(Shape::kCube, RelationKind::kLeft, Shape::kCylinder),
      R(Shape::kCylinder, RelationKind::kRight, Shape::kCube),
      R(Shape::kSphere, RelationKind::kLeft, Shape::kCube),
      R(Shape::kCylinder, RelationKind::kLeft, Shape::kSphere)};
  EXPECT_EQ(std::set<Phrase>(d.begin(), d.end()), expected);
}

TEST(MakeDistractors, SingleDrawsFourOthers) {
  Rng rng(6);
  const Phrase truth = AN(Color::kBlue, Shape::kCube);
  const Scene s = SampleScene(truth, rng);
  std::set<Phrase> seen;
  for (int t = 0; t < 300; ++t) {
    const auto d = MakeDistractors(DatasetKind::kSingle, truth, s, rng);
    const std::set<Phrase> got(d.begin(), d.end());
    EXPECT_EQ(got.size(), 4u);
    EXPECT_FALSE(got.count(truth));
    seen.insert(got.begin(), got.end());
  }
  EXPECT_EQ(seen.size(), 23u);
}

TEST(Splits, ClassUniverseSizes) {
  EXPECT_EQ(ClassUniverse(DatasetKind::kSingle).size(), 24u);
  EXPECT_EQ(ClassUniverse(DatasetKind::kTwo).size(), 24u);
  EXPECT_EQ(ClassUniverse(DatasetKind::kRelational).size(), 24u);
}

TEST(Splits, LiteralMemberships) {
  for (DatasetKind k : {DatasetKind::kSingle, DatasetKind::kTwo}) {
    EXPECT_EQ(AsSet(SplitClasses(k, Split::kValidation)),
              (std::set<Phrase>{AN(Color::kBrown, Shape::kCube),
                                AN(Color::kGreen, Shape::kCylinder)}));
    EXPECT_EQ(AsSet(SplitClasses(k, Split::kGeneralization)),
              (std::set<Phrase>{AN(Color::kGreen, Shape::kCube), AN(Color::kPurple, Shape::kCube),
                                AN(Color::kRed, Shape::kCube), AN(Color::kCyan, Shape::kCube),
                                AN(Color::kBlue, Shape::kCylinder), AN(Color::kGray, Shape::kCylinder),
                                AN(Color::kYellow, Shape::kCylinder),
                                AN(Color::kBrown, Shape::kCylinder)}));
    EXPECT_EQ(SplitClasses(k, Split::kTrain).size(), 14u);
  }
  const auto k = DatasetKind::kRelational;
  EXPECT_EQ(AsSet(SplitClasses(k, Split::kValidation)),
            (std::set<Phrase>{R(Shape::kCube, RelationKind::kFront, Shape::kSphere),
                              R(Shape::kSphere, RelationKind::kBehind, Shape::kCube)}));
  EXPECT_EQ(AsSet(SplitClasses(k, Split::kGeneralization)),
            (std::set<Phrase>{R(Shape::kCylinder, RelationKind::kFront, Shape::kCube),
                              R(Shape::kCube, RelationKind::kBehind, Shape::kCylinder)}));
  EXPECT_EQ(SplitClasses(k, Split::kTrain).size(), 20u);
}

class PerKind : public ::testing::TestWithParam<DatasetKind> {};

TEST_P(PerKind, SplitsDisjointAndCoverUniverse) {
  const DatasetKind k = GetParam();
  std::set<Phrase> all;
  std::size_t total = 0;
  for (Split s : kAllSplits) {
    const auto c = SplitClasses(k, s);
    total += c.size();
    all.insert(c.begin(), c.end());
  }
  EXPECT_EQ(all.size(), total);
  EXPECT_EQ(all, AsSet(ClassUniverse(k)));
}

TEST_P(PerKind, EveryWordAppearsInTraining) {
  const DatasetKind k = GetParam();
  std::set<int> colors, shapes, relations;
  for (const Phrase& p : SplitClasses(k, Split::kTrain)) {
    if (const auto* an = std::get_if<AdjNoun>(&p)) {
      colors.insert(static_cast<int>(an->adjective));
      shapes.insert(static_cast<int>(an->noun));
    } else {
      const auto& r = std::get<Rel>(p);
      shapes.insert(static_cast<int>(r.subject));
      shapes.insert(static_cast<int>(r.object));
      relations.insert(static_cast<int>(r.relation));
    }
  }
  EXPECT_EQ(shapes.size(), 3u);
  if (k == DatasetKind::kRelational) {
    EXPECT_EQ(relations.size(), 4u);
  } else {
    EXPECT_EQ(colors.size(), 8u);
  }
}

TEST_P(PerKind, GeneratedExamplesAreSound) {
  const DatasetKind k = GetParam();
  const DatasetManifest m = BuildDataset(k, {300, 60, 120}, 11);
  for (Split split : kAllSplits) {
    const std::set<Phrase> classes = AsSet(m.Classes(split));
    for (const Example& ex : m.Examples(split)) {
      EXPECT_EQ(ex.split, split);
      EXPECT_TRUE(classes.count(ex.true_phrase));
      EXPECT_TRUE(Holds(ex.scene, ex.true_phrase)) << ex.id;
      EXPECT_TRUE(RelationHolds(ex.scene, ex.true_phrase));
      const std::set<Phrase> d(ex.distractors.begin(), ex.distractors.end());
      EXPECT_EQ(d.size(), 4u);
      EXPECT_FALSE(d.count(ex.true_phrase));
      for (const Phrase& p : ex.distractors) {
        EXPECT_FALSE(Holds(ex.scene, p)) << ex.id << " " << PhraseToString(p);
      }
      if (k != DatasetKind::kSingle) ExpectValidTwoObject(ex.scene);
    }
  }
}

TEST_P(PerKind, ExamplesSpreadEvenlyOverClasses) {
  const DatasetKind k = GetParam();
  const DatasetManifest m = BuildDataset(k, {101, 7, 0}, 3);
  for (Split split : {Split::kTrain, Split::kValidation}) {
    std::map<Phrase, int> per_class;
    for (const Example& ex : m.Examples(split)) ++per_class[ex.true_phrase];
    int lo = 1 << 30, hi = 0;
    for (const Phrase& c : m.Classes(split)) {
      lo = std::min(lo, per_class[c]);
      hi = std::max(hi, per_class[c]);
    }
    EXPECT_LE(hi - lo, 1);
  }
  EXPECT_TRUE(m.Examples(Split::kGeneralization).empty());
}

TEST_P(PerKind, DeterministicAndRoundTrips) {
  const DatasetKind k = GetParam();
  const DatasetManifest a = BuildDataset(k, {100, 100, 100}, 7);
  const DatasetManifest b = BuildDataset(k, {100, 100, 100}, 7);
  std::ostringstream sa, sb;
  WriteManifest(sa, a);
  WriteManifest(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  std::istringstream in(sa.str());
  const DatasetManifest back = ReadManifest(in);
  EXPECT_EQ(back, a);
  std::ostringstream sc;
  WriteManifest(sc, BuildDataset(k, {100, 100, 100}, 8));
  EXPECT_NE(sc.str(), sa.str());
}

INSTANTIATE_TEST_SUITE_P(Kinds, PerKind,
                         ::testing::Values(DatasetKind::kSingle, DatasetKind::kTwo,
                                           DatasetKind::kRelational),
                         [](const auto& info) {
                           return std::string(DatasetKindName(info.param));
                         });

TEST(BuildDataset, DefaultCountsMatchTableOne) {
  const SplitCounts s = DefaultCounts(DatasetKind::kSingle);
  EXPECT_EQ(s.train, 5598u);
  EXPECT_EQ(s.validation, 799u);
  EXPECT_EQ(s.generalization, 3195u);
  const SplitCounts t = DefaultCounts(DatasetKind::kTwo);
  EXPECT_EQ(t.train, 20000u);
  EXPECT_EQ(t.validation, 20000u);
  EXPECT_EQ(t.generalization, 20000u);
  const SplitCounts r = DefaultCounts(DatasetKind::kRelational);
  EXPECT_EQ(r.train, 40000u);
  EXPECT_EQ(r.validation, 20000u);
  EXPECT_EQ(r.generalization, 20000u);
  const DatasetManifest m = BuildDataset(DatasetKind::kSingle, s, 1);
  EXPECT_EQ(m.Examples(Split::kTrain).size(), 5598u);
  EXPECT_EQ(m.Examples(Split::kValidation).size(), 799u);
  EXPECT_EQ(m.Examples(Split::kGeneralization).size(), 3195u);
}

TEST(Manifest, HeaderCarriesSchema) {
  std::ostringstream out;
  WriteManifest(out, BuildDataset(DatasetKind::kTwo, {2, 1, 1}, 9));
  const std::string first = out.str().substr(0, out.str().find('\n'));
  EXPECT_NE(first.find("\"kind\":\"two\""), std::string::npos);
  EXPECT_NE(first.find("\"seed\":9"), std::string::npos);
  EXPECT_NE(first.find("\"tau\""), std::string::npos);
  EXPECT_NE(first.find("\"version\""), std::string::npos);
}

TEST(Manifest, RejectsGarbage) {
  std::istringstream empty("");
  EXPECT_THROW(ReadManifest(empty), FormatError);
  std::istringstream bad("{\"schema\":\"nope\"}\n");
  EXPECT_THROW(ReadManifest(bad), FormatError);
  std::ostringstream out;
  WriteManifest(out, BuildDataset(DatasetKind::kSingle, {1, 0, 0}, 1));
  std::string text = out.str();
  text.replace(text.find("\"label\":\""), 9, "\"label\":\"teal ");
  std::istringstream mangled(text);
  EXPECT_THROW(ReadManifest(mangled), FormatError);
}

}  // namespace
}  // namespace cbl
