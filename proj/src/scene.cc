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

#include "cbl/scene.h"

#include <sstream>

#include "cbl/errors.h"

namespace cbl {

std::string_view ShapeName(Shape s) {
  switch (s) {
    case Shape::kCube: return "cube";
    case Shape::kSphere: return "sphere";
    case Shape::kCylinder: return "cylinder";
  }
  return "?";
}

std::string_view ColorName(Color c) {
  switch (c) {
    case Color::kBlue: return "blue";
    case Color::kGray: return "gray";
    case Color::kYellow: return "yellow";
    case Color::kBrown: return "brown";
    case Color::kGreen: return "green";
    case Color::kPurple: return "purple";
    case Color::kRed: return "red";
    case Color::kCyan: return "cyan";
  }
  return "?";
}

std::string_view RelationName(RelationKind r) {
  switch (r) {
    case RelationKind::kLeft: return "left";
    case RelationKind::kRight: return "right";
    case RelationKind::kFront: return "front";
    case RelationKind::kBehind: return "behind";
  }
  return "?";
}

std::string_view RelationToken(RelationKind r) {
  switch (r) {
    case RelationKind::kLeft: return "left-of";
    case RelationKind::kRight: return "right-of";
    case RelationKind::kFront: return "front-of";
    case RelationKind::kBehind: return "behind";
  }
  return "?";
}

std::optional<Shape> ParseShape(std::string_view word) {
  for (Shape s : kAllShapes) {
    if (ShapeName(s) == word) return s;
  }
  return std::nullopt;
}

std::optional<Color> ParseColor(std::string_view word) {
  for (Color c : kAllColors) {
    if (ColorName(c) == word) return c;
  }
  return std::nullopt;
}

std::optional<RelationKind> ParseRelation(std::string_view word) {
  for (RelationKind r : kAllRelations) {
    if (RelationName(r) == word || RelationToken(r) == word) return r;
  }
  return std::nullopt;
}

RelationKind Opposite(RelationKind r) {
  switch (r) {
    case RelationKind::kLeft: return RelationKind::kRight;
    case RelationKind::kRight: return RelationKind::kLeft;
    case RelationKind::kFront: return RelationKind::kBehind;
    case RelationKind::kBehind: return RelationKind::kFront;
  }
  return r;
}

Axis AxisOf(RelationKind r) {
  return (r == RelationKind::kLeft || r == RelationKind::kRight)
             ? Axis::kLateral
             : Axis::kDepth;
}

std::string PhraseToString(const Phrase& p) {
  if (const auto* an = std::get_if<AdjNoun>(&p)) {
    std::string out(ColorName(an->adjective));
    out += ' ';
    out += ShapeName(an->noun);
    return out;
  }
  const Rel& r = std::get<Rel>(p);
  std::string out(ShapeName(r.subject));
  out += ' ';
  out += RelationToken(r.relation);
  out += ' ';
  out += ShapeName(r.object);
  return out;
}

Phrase ParsePhrase(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) words.push_back(w);
  if (words.size() == 2) {
    auto c = ParseColor(words[0]);
    auto s = ParseShape(words[1]);
    if (c && s) return AdjNoun{*c, *s};
  } else if (words.size() == 3) {
    auto s = ParseShape(words[0]);
    auto r = ParseRelation(words[1]);
    auto o = ParseShape(words[2]);
    if (s && r && o && *s != *o) return Rel{*s, *r, *o};
  }
  throw FormatError("unparseable phrase: '" + std::string(text) + "'");
}

std::string_view DatasetKindName(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSingle: return "single";
    case DatasetKind::kTwo: return "two";
    case DatasetKind::kRelational: return "relational";
  }
  return "?";
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kGeneralization: return "generalization";
  }
  return "?";
}

DatasetKind ParseDatasetKind(std::string_view name) {
  for (DatasetKind k :
       {DatasetKind::kSingle, DatasetKind::kTwo, DatasetKind::kRelational}) {
    if (DatasetKindName(k) == name) return k;
  }
  throw ConfigError("unknown dataset kind: '" + std::string(name) + "'");
}

Split ParseSplit(std::string_view name) {
  for (Split s : kAllSplits) {
    if (SplitName(s) == name) return s;
  }
  throw ConfigError("unknown split: '" + std::string(name) + "'");
}

std::array<Phrase, kNumCandidates> Example::Candidates() const {
  return {true_phrase, distractors[0], distractors[1], distractors[2],
          distractors[3]};
}

}  // namespace cbl
