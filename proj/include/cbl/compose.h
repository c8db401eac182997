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

#ifndef CBL_COMPOSE_H_
#define CBL_COMPOSE_H_

// Compositional distributional semantics models. Each turns a phrase into an
// embedding from learnable word-level parameters:
//
//          adjective-noun          subject-relation-object
//   Add    a + n                   s + R + o
//   Mult   a * n                   s * R * o
//   Conv   a (x) n                 s (x) R (x) o
//   TL     A n                     s * (R o)
//   RF     a(x)r_a + n(x)r_n       s(x)r_s + R(x)r_R + o(x)r_o
//
// (x) is circular convolution, * is the elementwise product, capitals are
// d x d matrices. Add, Mult and Conv are evaluated as (s . o) . R so that
// swapping subject and object gives bit-identical results.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cbl/embed.h"
#include "cbl/scene.h"

namespace cbl {

enum class ModelKind : uint8_t { kAdd, kMult, kConv, kTL, kRF };

inline constexpr std::array<ModelKind, 5> kAllModels = {
    ModelKind::kAdd, ModelKind::kMult, ModelKind::kConv, ModelKind::kTL,
    ModelKind::kRF};

// "add", "tl", ...
std::string_view ModelKey(ModelKind m);
// "Add", "TL", ...
std::string_view ModelDisplayName(ModelKind m);
// Case-insensitive. Throws ConfigError.
ModelKind ParseModelKind(std::string_view name);

// Binary composition is commutative for these models.
bool IsCommutative(ModelKind m);

enum class Role : uint8_t { kAdjective, kNoun, kSubject, kRelation, kObject };
std::string_view RoleName(Role r);

struct Vocabulary {
  std::vector<Color> adjectives;
  std::vector<Shape> nouns;
  std::vector<RelationKind> relations;

  bool Contains(Color c) const;
  bool Contains(Shape s) const;
  bool Contains(RelationKind r) const;
  bool operator==(const Vocabulary&) const = default;
};

// 8 colors + 3 shapes for the attribute datasets; 3 shapes + 4 relations for
// the relational one.
Vocabulary VocabularyFor(DatasetKind kind);

// One contiguous slice of the flat parameter vector.
struct ParamBlock {
  std::string name;  // "vec:red", "mat:left", "role:subject"
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const ParamBlock&) const = default;
};

// Which block holds each word or role; -1 when the model has none.
struct ParamLayout {
  std::vector<ParamBlock> blocks;
  std::array<int, 8> color_vec{};
  std::array<int, 8> color_mat{};
  std::array<int, 3> shape_vec{};
  std::array<int, 4> relation_vec{};
  std::array<int, 4> relation_mat{};
  std::array<int, 5> role_vec{};
  std::size_t total = 0;

  bool operator==(const ParamLayout&) const = default;
};

ParamLayout MakeLayout(ModelKind model, const Vocabulary& vocab,
                       std::size_t dim);

inline constexpr double kDefaultLogitScale = 10.0;

struct ComposerParams {
  ModelKind model = ModelKind::kAdd;
  std::size_t dim = 0;
  Vocabulary vocab;
  ParamLayout layout;
  std::vector<double> data;
  // Fixed temperature used by the scorer; never trained.
  double logit_scale = kDefaultLogitScale;

  std::span<const double> Block(int index) const;
  std::span<double> Block(int index);

  bool operator==(const ComposerParams&) const = default;
};

// Same layout as the parameters; `touched` marks blocks that received a
// contribution.
struct Gradients {
  std::vector<double> data;
  std::vector<uint8_t> touched;

  explicit Gradients(const ComposerParams& params)
      : data(params.data.size(), 0.0), touched(params.layout.blocks.size(), 0) {}

  void Clear();
};

// Vectors ~ N(0, 1/d) per component; TL matrices identity + N(0, 0.02^2).
// Deterministic in (model, vocab, dim, seed). ConfigError when dim == 0.
ComposerParams InitParams(ModelKind model, const Vocabulary& vocab,
                          std::size_t dim, uint64_t seed);

// Number of scalar learnable parameters.
std::size_t ParamCount(ModelKind model, DatasetKind kind, std::size_t dim);

// Throws VocabularyError when the phrase uses a word outside the vocabulary.
Embedding Compose(const ComposerParams& params, const Phrase& phrase);

// grads += d(upstream . Compose(params, phrase)) / d(params).
void Backward(const ComposerParams& params, const Phrase& phrase,
              std::span<const double> upstream, Gradients& grads);

// Text checkpoint with a format-version tag; lossless for doubles.
void WriteCheckpoint(std::ostream& out, const ComposerParams& params,
                     DatasetKind kind);
// Throws FormatError.
ComposerParams ReadCheckpoint(std::istream& in, DatasetKind* kind = nullptr);

}  // namespace cbl

#endif  // CBL_COMPOSE_H_
