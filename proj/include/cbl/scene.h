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

#ifndef CBL_SCENE_H_
#define CBL_SCENE_H_

// Data model for the synthetic scenes: shapes, colors, spatial relations,
// the two phrase templates, and labelled examples.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cbl {

enum class Shape : uint8_t { kCube, kSphere, kCylinder };
enum class Color : uint8_t {
  kBlue, kGray, kYellow, kBrown, kGreen, kPurple, kRed, kCyan,
};
enum class RelationKind : uint8_t { kLeft, kRight, kFront, kBehind };
enum class Axis : uint8_t { kLateral, kDepth };

inline constexpr std::array<Shape, 3> kAllShapes = {
    Shape::kCube, Shape::kSphere, Shape::kCylinder};
inline constexpr std::array<Color, 8> kAllColors = {
    Color::kBlue,  Color::kGray,   Color::kYellow, Color::kBrown,
    Color::kGreen, Color::kPurple, Color::kRed,    Color::kCyan};
inline constexpr std::array<RelationKind, 4> kAllRelations = {
    RelationKind::kLeft, RelationKind::kRight, RelationKind::kFront,
    RelationKind::kBehind};

std::string_view ShapeName(Shape s);
std::string_view ColorName(Color c);
// Vocabulary word ("left", "front", ...).
std::string_view RelationName(RelationKind r);
// Token used in rendered labels ("left-of", "front-of", "behind").
std::string_view RelationToken(RelationKind r);

std::optional<Shape> ParseShape(std::string_view word);
std::optional<Color> ParseColor(std::string_view word);
// Accepts both the vocabulary word and the label token.
std::optional<RelationKind> ParseRelation(std::string_view word);

RelationKind Opposite(RelationKind r);
Axis AxisOf(RelationKind r);

struct SceneObject {
  Shape shape = Shape::kCube;
  Color color = Color::kBlue;
  double x = 0.0;     // lateral, left is negative
  double z = 0.0;     // depth, front is negative
  double size = 0.5;  // radius

  bool operator==(const SceneObject&) const = default;
};

struct Scene {
  std::vector<SceneObject> objects;

  bool operator==(const Scene&) const = default;
};

struct AdjNoun {
  Color adjective;
  Shape noun;

  bool operator==(const AdjNoun&) const = default;
  auto operator<=>(const AdjNoun&) const = default;
};

struct Rel {
  Shape subject;
  RelationKind relation;
  Shape object;

  bool operator==(const Rel&) const = default;
  auto operator<=>(const Rel&) const = default;
};

using Phrase = std::variant<AdjNoun, Rel>;

// "red cube", "cube left-of sphere".
std::string PhraseToString(const Phrase& p);
// Throws FormatError on anything PhraseToString cannot produce.
Phrase ParsePhrase(std::string_view text);

enum class DatasetKind : uint8_t { kSingle, kTwo, kRelational };
enum class Split : uint8_t { kTrain, kValidation, kGeneralization };

inline constexpr std::array<Split, 3> kAllSplits = {
    Split::kTrain, Split::kValidation, Split::kGeneralization};

std::string_view DatasetKindName(DatasetKind k);
std::string_view SplitName(Split s);
// Throws ConfigError.
DatasetKind ParseDatasetKind(std::string_view name);
Split ParseSplit(std::string_view name);

inline constexpr int kNumDistractors = 4;
inline constexpr int kNumCandidates = kNumDistractors + 1;

struct Example {
  std::string id;
  Split split = Split::kTrain;
  Scene scene;
  Phrase true_phrase;
  std::array<Phrase, kNumDistractors> distractors;

  // True label first, then the distractors in stored order.
  std::array<Phrase, kNumCandidates> Candidates() const;

  bool operator==(const Example&) const = default;
};

}  // namespace cbl

#endif  // CBL_SCENE_H_
