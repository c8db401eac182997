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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cbl/errors.h"

namespace cbl {
namespace {

using Json = nlohmann::ordered_json;

const SceneObject* FindShape(const Scene& scene, Shape s) {
  for (const SceneObject& obj : scene.objects) {
    if (obj.shape == s) return &obj;
  }
  return nullptr;
}

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SceneObject RandomObject(Shape shape, Color color, Rng& rng) {
  SceneObject obj;
  obj.shape = shape;
  obj.color = color;
  obj.size = Uniform(rng, kMinSize, kMaxSize);
  obj.x = Uniform(rng, -kCoordLimit, kCoordLimit);
  obj.z = Uniform(rng, -kCoordLimit, kCoordLimit);
  return obj;
}

bool Overlaps(const SceneObject& a, const SceneObject& b) {
  return std::hypot(a.x - b.x, a.z - b.z) <= a.size + b.size;
}

bool InRange(double v) { return v >= -kCoordLimit && v <= kCoordLimit; }

Color RandomColor(Rng& rng) {
  return kAllColors[std::uniform_int_distribution<std::size_t>(
      0, kAllColors.size() - 1)(rng)];
}

Scene SampleRelational(const Rel& rel, Rng& rng) {
  Color subject_color = RandomColor(rng);
  Color object_color = RandomColor(rng);
  while (object_color == subject_color) object_color = RandomColor(rng);

  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    SceneObject s = RandomObject(rel.subject, subject_color, rng);
    SceneObject o = RandomObject(rel.object, object_color, rng);
    // Pin the off-axis coordinate of o within tau of s.
    const double offset = Uniform(rng, -kTau, kTau);
    if (std::abs(offset) >= kTau) continue;
    if (AxisOf(rel.relation) == Axis::kLateral) {
      o.z = s.z + offset;
      if (!InRange(o.z)) continue;
    } else {
      o.x = s.x + offset;
      if (!InRange(o.x)) continue;
    }
    if (Overlaps(s, o)) continue;
    Scene scene{{s, o}};
    if (!RelationHolds(scene, rel)) continue;
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
      std::swap(scene.objects[0], scene.objects[1]);
    }
    return scene;
  }
  throw GenerationError("could not place " + PhraseToString(rel) + " after " +
                        std::to_string(kMaxSampleAttempts) + " attempts");
}

std::vector<AdjNoun> AllAdjNouns() {
  std::vector<AdjNoun> out;
  for (Color c : kAllColors) {
    for (Shape s : kAllShapes) out.push_back({c, s});
  }
  return out;
}

// Draws `count` distinct entries of `pool` not in `excluded`.
std::vector<Phrase> DrawDistinct(const std::vector<AdjNoun>& pool,
                                 const std::vector<AdjNoun>& excluded,
                                 std::size_t count, Rng& rng) {
  std::vector<AdjNoun> candidates;
  for (const AdjNoun& p : pool) {
    if (std::find(excluded.begin(), excluded.end(), p) == excluded.end()) {
      candidates.push_back(p);
    }
  }
  if (candidates.size() < count) {
    throw GenerationError("distractor pool exhausted");
  }
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  return {candidates.begin(), candidates.begin() + count};
}

Shape ThirdShape(Shape a, Shape b) {
  for (Shape s : kAllShapes) {
    if (s != a && s != b) return s;
  }
  throw ContractError("no third shape");
}

const AdjNoun& RequireAdjNoun(const Phrase& p) {
  if (const auto* an = std::get_if<AdjNoun>(&p)) return *an;
  throw ContractError("expected an adjective-noun phrase, got '" +
                      PhraseToString(p) + "'");
}

const Rel& RequireRel(const Phrase& p) {
  if (const auto* r = std::get_if<Rel>(&p)) return *r;
  throw ContractError("expected a relational phrase, got '" +
                      PhraseToString(p) + "'");
}

Json SceneToJson(const Scene& scene) {
  Json objects = Json::array();
  for (const SceneObject& obj : scene.objects) {
    objects.push_back({{"shape", ShapeName(obj.shape)},
                       {"color", ColorName(obj.color)},
                       {"x", obj.x},
                       {"z", obj.z},
                       {"size", obj.size}});
  }
  return objects;
}

Scene SceneFromJson(const Json& j) {
  Scene scene;
  for (const Json& o : j) {
    SceneObject obj;
    auto shape = ParseShape(o.at("shape").get<std::string>());
    auto color = ParseColor(o.at("color").get<std::string>());
    if (!shape || !color) throw FormatError("bad scene object");
    obj.shape = *shape;
    obj.color = *color;
    obj.x = o.at("x").get<double>();
    obj.z = o.at("z").get<double>();
    obj.size = o.at("size").get<double>();
    scene.objects.push_back(obj);
  }
  return scene;
}

std::string ExampleId(Split split, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%06zu",
                std::string(SplitName(split)).c_str(), index);
  return buf;
}

}  // namespace

bool RelationHolds(const Scene& scene, const Phrase& p, double tau) {
  if (const auto* an = std::get_if<AdjNoun>(&p)) {
    return std::any_of(scene.objects.begin(), scene.objects.end(),
                       [&](const SceneObject& o) {
                         return o.color == an->adjective && o.shape == an->noun;
                       });
  }
  const Rel& rel = std::get<Rel>(p);
  if (rel.subject == rel.object) return false;
  const SceneObject* s = FindShape(scene, rel.subject);
  const SceneObject* o = FindShape(scene, rel.object);
  if (s == nullptr || o == nullptr) return false;
  switch (rel.relation) {
    case RelationKind::kLeft: return s->x + tau <= o->x;
    case RelationKind::kRight: return s->x >= o->x + tau;
    case RelationKind::kFront: return s->z + tau <= o->z;
    case RelationKind::kBehind: return s->z >= o->z + tau;
  }
  return false;
}

Scene SampleScene(const Phrase& cls, Rng& rng) {
  if (const auto* an = std::get_if<AdjNoun>(&cls)) {
    return Scene{{RandomObject(an->noun, an->adjective, rng)}};
  }
  const Rel& rel = std::get<Rel>(cls);
  if (rel.subject == rel.object) {
    throw ContractError("relational class needs distinct shapes");
  }
  return SampleRelational(rel, rng);
}

Scene SampleTwoObjectScene(const AdjNoun& first, const AdjNoun& second,
                           Rng& rng) {
  if (first.noun == second.noun || first.adjective == second.adjective) {
    throw ContractError("two-object scenes need distinct shapes and colors");
  }
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    SceneObject a = RandomObject(first.noun, first.adjective, rng);
    SceneObject b = RandomObject(second.noun, second.adjective, rng);
    if (Overlaps(a, b)) continue;
    Scene scene{{a, b}};
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
      std::swap(scene.objects[0], scene.objects[1]);
    }
    return scene;
  }
  throw GenerationError("could not place two non-overlapping objects");
}

std::array<Phrase, kNumDistractors> MakeDistractors(DatasetKind kind,
                                                    const Phrase& true_phrase,
                                                    const Scene& scene,
                                                    Rng& rng) {
  std::array<Phrase, kNumDistractors> out;
  switch (kind) {
    case DatasetKind::kSingle: {
      const AdjNoun& t = RequireAdjNoun(true_phrase);
      auto drawn = DrawDistinct(AllAdjNouns(), {t}, kNumDistractors, rng);
      std::copy(drawn.begin(), drawn.end(), out.begin());
      return out;
    }
    case DatasetKind::kTwo: {
      const AdjNoun& t = RequireAdjNoun(true_phrase);
      if (scene.objects.size() != 2) {
        throw ContractError("two-object distractors need a two-object scene");
      }
      const SceneObject* other = nullptr;
      for (const SceneObject& obj : scene.objects) {
        if (!(obj.color == t.adjective && obj.shape == t.noun)) other = &obj;
      }
      if (other == nullptr) {
        throw ContractError("true label does not match a scene object");
      }
      const AdjNoun other_label{other->color, other->shape};
      const AdjNoun swap_a{t.adjective, other->shape};
      const AdjNoun swap_b{other->color, t.noun};
      auto drawn = DrawDistinct(AllAdjNouns(),
                                {t, other_label, swap_a, swap_b}, 2, rng);
      out = {swap_a, swap_b, drawn[0], drawn[1]};
      return out;
    }
    case DatasetKind::kRelational: {
      const Rel& t = RequireRel(true_phrase);
      const Shape c = ThirdShape(t.subject, t.object);
      out = {Rel{t.object, t.relation, t.subject},
             Rel{t.subject, Opposite(t.relation), t.object},
             Rel{t.subject, t.relation, c}, Rel{c, t.relation, t.object}};
      return out;
    }
  }
  throw ConfigError("unknown dataset kind");
}

std::vector<Phrase> ClassUniverse(DatasetKind kind) {
  std::vector<Phrase> out;
  if (kind == DatasetKind::kRelational) {
    for (Shape s : kAllShapes) {
      for (RelationKind r : kAllRelations) {
        for (Shape o : kAllShapes) {
          if (s != o) out.push_back(Rel{s, r, o});
        }
      }
    }
  } else {
    for (const AdjNoun& an : AllAdjNouns()) out.push_back(an);
  }
  return out;
}

std::vector<Phrase> SplitClasses(DatasetKind kind, Split split) {
  using C = Color;
  using S = Shape;
  using R = RelationKind;
  std::vector<Phrase> validation;
  std::vector<Phrase> generalization;
  if (kind == DatasetKind::kRelational) {
    validation = {Rel{S::kCube, R::kFront, S::kSphere},
                  Rel{S::kSphere, R::kBehind, S::kCube}};
    generalization = {Rel{S::kCylinder, R::kFront, S::kCube},
                      Rel{S::kCube, R::kBehind, S::kCylinder}};
  } else {
    validation = {AdjNoun{C::kBrown, S::kCube}, AdjNoun{C::kGreen, S::kCylinder}};
    generalization = {
        AdjNoun{C::kGreen, S::kCube},      AdjNoun{C::kPurple, S::kCube},
        AdjNoun{C::kRed, S::kCube},        AdjNoun{C::kCyan, S::kCube},
        AdjNoun{C::kBlue, S::kCylinder},   AdjNoun{C::kGray, S::kCylinder},
        AdjNoun{C::kYellow, S::kCylinder}, AdjNoun{C::kBrown, S::kCylinder}};
  }
  switch (split) {
    case Split::kValidation: return validation;
    case Split::kGeneralization: return generalization;
    case Split::kTrain: break;
  }
  std::vector<Phrase> train;
  for (const Phrase& p : ClassUniverse(kind)) {
    const auto held_out = [&](const std::vector<Phrase>& v) {
      return std::find(v.begin(), v.end(), p) != v.end();
    };
    if (!held_out(validation) && !held_out(generalization)) train.push_back(p);
  }
  return train;
}

std::size_t SplitCounts::operator[](Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kGeneralization: return generalization;
  }
  return 0;
}

SplitCounts DefaultCounts(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSingle: return {5598, 799, 3195};
    case DatasetKind::kTwo: return {20000, 20000, 20000};
    case DatasetKind::kRelational: return {40000, 20000, 20000};
  }
  throw ConfigError("unknown dataset kind");
}

std::size_t DatasetManifest::TotalExamples() const {
  std::size_t n = 0;
  for (const auto& v : examples) n += v.size();
  return n;
}

DatasetManifest BuildDataset(DatasetKind kind, const SplitCounts& counts,
                             uint64_t seed) {
  if (kind != DatasetKind::kSingle && kind != DatasetKind::kTwo &&
      kind != DatasetKind::kRelational) {
    throw ConfigError("unknown dataset kind");
  }
  DatasetManifest manifest;
  manifest.kind = kind;
  manifest.seed = seed;
  manifest.tau = kTau;
  for (Split split : kAllSplits) {
    const auto idx = static_cast<std::size_t>(split);
    manifest.classes[idx] = SplitClasses(kind, split);
    const std::vector<Phrase>& classes = manifest.classes[idx];
    std::vector<Example>& examples = manifest.examples[idx];
    const std::size_t n = counts[split];
    examples.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      Rng rng = MakeRng(DeriveSeed(seed, idx), Stream::kScene, j);
      Example ex;
      ex.id = ExampleId(split, j);
      ex.split = split;
      ex.true_phrase = classes[j % classes.size()];
      if (kind == DatasetKind::kTwo) {
        // The second object comes from the same split so every true
        // description of the image stays inside the split's class list.
        const AdjNoun& t = std::get<AdjNoun>(ex.true_phrase);
        std::vector<AdjNoun> partners;
        for (const Phrase& p : classes) {
          const AdjNoun& c = std::get<AdjNoun>(p);
          if (c.noun != t.noun && c.adjective != t.adjective) {
            partners.push_back(c);
          }
        }
        if (partners.empty()) {
          throw GenerationError("no compatible second object for " +
                                PhraseToString(t));
        }
        const AdjNoun other = partners[std::uniform_int_distribution<
            std::size_t>(0, partners.size() - 1)(rng)];
        ex.scene = SampleTwoObjectScene(t, other, rng);
      } else {
        ex.scene = SampleScene(ex.true_phrase, rng);
      }
      ex.distractors = MakeDistractors(kind, ex.true_phrase, ex.scene, rng);
      examples.push_back(std::move(ex));
    }
  }
  return manifest;
}

void WriteManifest(std::ostream& out, const DatasetManifest& manifest) {
  Json header;
  header["schema"] = "cbl-manifest";
  header["version"] = kManifestVersion;
  header["kind"] = DatasetKindName(manifest.kind);
  header["seed"] = manifest.seed;
  header["tau"] = manifest.tau;
  Json classes = Json::object();
  for (Split split : kAllSplits) {
    Json list = Json::array();
    for (const Phrase& p : manifest.Classes(split)) {
      list.push_back(PhraseToString(p));
    }
    classes[std::string(SplitName(split))] = std::move(list);
  }
  header["classes"] = std::move(classes);
  out << header.dump() << '\n';

  for (Split split : kAllSplits) {
    for (const Example& ex : manifest.Examples(split)) {
      Json rec;
      rec["id"] = ex.id;
      rec["split"] = SplitName(split);
      rec["kind"] = DatasetKindName(manifest.kind);
      rec["scene"] = SceneToJson(ex.scene);
      rec["label"] = PhraseToString(ex.true_phrase);
      Json distractors = Json::array();
      for (const Phrase& d : ex.distractors) {
        distractors.push_back(PhraseToString(d));
      }
      rec["distractors"] = std::move(distractors);
      out << rec.dump() << '\n';
    }
  }
}

DatasetManifest ReadManifest(std::istream& in) {
  DatasetManifest manifest;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty manifest");
  try {
    const Json header = Json::parse(line);
    if (header.at("schema").get<std::string>() != "cbl-manifest" ||
        header.at("version").get<int>() != kManifestVersion) {
      throw FormatError("unsupported manifest schema");
    }
    manifest.kind = ParseDatasetKind(header.at("kind").get<std::string>());
    manifest.seed = header.at("seed").get<uint64_t>();
    manifest.tau = header.at("tau").get<double>();
    for (Split split : kAllSplits) {
      for (const Json& p : header.at("classes").at(std::string(SplitName(split)))) {
        manifest.classes[static_cast<std::size_t>(split)].push_back(
            ParsePhrase(p.get<std::string>()));
      }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const Json rec = Json::parse(line);
      Example ex;
      ex.id = rec.at("id").get<std::string>();
      ex.split = ParseSplit(rec.at("split").get<std::string>());
      ex.scene = SceneFromJson(rec.at("scene"));
      ex.true_phrase = ParsePhrase(rec.at("label").get<std::string>());
      const Json& ds = rec.at("distractors");
      if (ds.size() != kNumDistractors) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected 4 distractors");
      }
      for (int i = 0; i < kNumDistractors; ++i) {
        ex.distractors[i] = ParsePhrase(ds[i].get<std::string>());
      }
      manifest.Examples(ex.split).push_back(std::move(ex));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return manifest;
}

}  // namespace cbl
