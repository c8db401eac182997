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

#include "cbl/compose.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cbl/circular.h"
#include "cbl/errors.h"
#include "cbl/kernels.h"
#include "cbl/rng.h"

namespace cbl {
namespace {

using Vec = std::vector<double>;
using CSpan = std::span<const double>;

int AddBlock(ParamLayout& layout, std::string name, std::size_t rows,
             std::size_t cols) {
  layout.blocks.push_back({std::move(name), layout.total, rows, cols});
  layout.total += rows * cols;
  return static_cast<int>(layout.blocks.size()) - 1;
}

int Require(int block, std::string_view what, std::string_view word) {
  if (block < 0) {
    throw VocabularyError("no " + std::string(what) + " parameters for '" +
                          std::string(word) + "'");
  }
  return block;
}

// Block lookups. Each throws VocabularyError for words the model lacks.
int ColorVec(const ComposerParams& p, Color c) {
  return Require(p.layout.color_vec[static_cast<int>(c)], "vector",
                 ColorName(c));
}
int ColorMat(const ComposerParams& p, Color c) {
  return Require(p.layout.color_mat[static_cast<int>(c)], "matrix",
                 ColorName(c));
}
int ShapeVec(const ComposerParams& p, Shape s) {
  return Require(p.layout.shape_vec[static_cast<int>(s)], "vector",
                 ShapeName(s));
}
int RelationVec(const ComposerParams& p, RelationKind r) {
  return Require(p.layout.relation_vec[static_cast<int>(r)], "vector",
                 RelationName(r));
}
int RelationMat(const ComposerParams& p, RelationKind r) {
  return Require(p.layout.relation_mat[static_cast<int>(r)], "matrix",
                 RelationName(r));
}
int RoleVec(const ComposerParams& p, Role r) {
  return Require(p.layout.role_vec[static_cast<int>(r)], "role", RoleName(r));
}

std::span<double> GradBlock(const ComposerParams& p, Gradients& g, int block) {
  const ParamBlock& b = p.layout.blocks[block];
  g.touched[block] = 1;
  return {g.data.data() + b.offset, b.size()};
}

Vec Conv(CSpan a, CSpan b) { return hrr::CircConv(a, b); }

Vec ComposeAdjNoun(const ComposerParams& p, const AdjNoun& an) {
  const std::size_t d = p.dim;
  Vec out(d);
  switch (p.model) {
    case ModelKind::kAdd:
      kernels::Add(p.Block(ColorVec(p, an.adjective)),
                   p.Block(ShapeVec(p, an.noun)), out);
      break;
    case ModelKind::kMult:
      kernels::Hadamard(p.Block(ColorVec(p, an.adjective)),
                        p.Block(ShapeVec(p, an.noun)), out);
      break;
    case ModelKind::kConv:
      out = Conv(p.Block(ColorVec(p, an.adjective)),
                 p.Block(ShapeVec(p, an.noun)));
      break;
    case ModelKind::kTL:
      kernels::MatVec(p.Block(ColorMat(p, an.adjective)),
                      p.Block(ShapeVec(p, an.noun)), out);
      break;
    case ModelKind::kRF: {
      out = Conv(p.Block(ColorVec(p, an.adjective)),
                 p.Block(RoleVec(p, Role::kAdjective)));
      const Vec noun = Conv(p.Block(ShapeVec(p, an.noun)),
                            p.Block(RoleVec(p, Role::kNoun)));
      kernels::Add(out, noun, out);
      break;
    }
  }
  return out;
}

Vec ComposeRel(const ComposerParams& p, const Rel& rel) {
  const std::size_t d = p.dim;
  Vec out(d);
  switch (p.model) {
    case ModelKind::kAdd: {
      Vec so(d);
      kernels::Add(p.Block(ShapeVec(p, rel.subject)),
                   p.Block(ShapeVec(p, rel.object)), so);
      kernels::Add(so, p.Block(RelationVec(p, rel.relation)), out);
      break;
    }
    case ModelKind::kMult: {
      Vec so(d);
      kernels::Hadamard(p.Block(ShapeVec(p, rel.subject)),
                        p.Block(ShapeVec(p, rel.object)), so);
      kernels::Hadamard(so, p.Block(RelationVec(p, rel.relation)), out);
      break;
    }
    case ModelKind::kConv: {
      const Vec so = Conv(p.Block(ShapeVec(p, rel.subject)),
                          p.Block(ShapeVec(p, rel.object)));
      out = Conv(so, p.Block(RelationVec(p, rel.relation)));
      break;
    }
    case ModelKind::kTL: {
      Vec ro(d);
      kernels::MatVec(p.Block(RelationMat(p, rel.relation)),
                      p.Block(ShapeVec(p, rel.object)), ro);
      kernels::Hadamard(p.Block(ShapeVec(p, rel.subject)), ro, out);
      break;
    }
    case ModelKind::kRF: {
      out = Conv(p.Block(ShapeVec(p, rel.subject)),
                 p.Block(RoleVec(p, Role::kSubject)));
      const Vec r = Conv(p.Block(RelationVec(p, rel.relation)),
                         p.Block(RoleVec(p, Role::kRelation)));
      const Vec o = Conv(p.Block(ShapeVec(p, rel.object)),
                         p.Block(RoleVec(p, Role::kObject)));
      kernels::Add(out, r, out);
      kernels::Add(out, o, out);
      break;
    }
  }
  return out;
}

// Gradients of u . (x (x) y) for both factors.
void ConvBackward(const ComposerParams& p, Gradients& g, int x_block,
                  int y_block, CSpan u) {
  const CSpan x = p.Block(x_block);
  const CSpan y = p.Block(y_block);
  hrr::CircCorrAcc(y, u, GradBlock(p, g, x_block));
  hrr::CircCorrAcc(x, u, GradBlock(p, g, y_block));
}

void BackwardAdjNoun(const ComposerParams& p, const AdjNoun& an, CSpan u,
                     Gradients& g) {
  switch (p.model) {
    case ModelKind::kAdd: {
      const int a = ColorVec(p, an.adjective);
      const int n = ShapeVec(p, an.noun);
      kernels::Add(GradBlock(p, g, a), u, GradBlock(p, g, a));
      kernels::Add(GradBlock(p, g, n), u, GradBlock(p, g, n));
      break;
    }
    case ModelKind::kMult: {
      const int a = ColorVec(p, an.adjective);
      const int n = ShapeVec(p, an.noun);
      kernels::HadamardAcc(u, p.Block(n), GradBlock(p, g, a));
      kernels::HadamardAcc(u, p.Block(a), GradBlock(p, g, n));
      break;
    }
    case ModelKind::kConv:
      ConvBackward(p, g, ColorVec(p, an.adjective), ShapeVec(p, an.noun), u);
      break;
    case ModelKind::kTL: {
      const int a = ColorMat(p, an.adjective);
      const int n = ShapeVec(p, an.noun);
      kernels::Rank1(1.0, u, p.Block(n), GradBlock(p, g, a));
      kernels::MatVecTransposedAcc(p.Block(a), u, GradBlock(p, g, n));
      break;
    }
    case ModelKind::kRF:
      ConvBackward(p, g, ColorVec(p, an.adjective),
                   RoleVec(p, Role::kAdjective), u);
      ConvBackward(p, g, ShapeVec(p, an.noun), RoleVec(p, Role::kNoun), u);
      break;
  }
}

void BackwardRel(const ComposerParams& p, const Rel& rel, CSpan u,
                 Gradients& g) {
  const std::size_t d = p.dim;
  switch (p.model) {
    case ModelKind::kAdd: {
      for (int b : {ShapeVec(p, rel.subject), ShapeVec(p, rel.object),
                    RelationVec(p, rel.relation)}) {
        kernels::Add(GradBlock(p, g, b), u, GradBlock(p, g, b));
      }
      break;
    }
    case ModelKind::kMult: {
      const int s = ShapeVec(p, rel.subject);
      const int o = ShapeVec(p, rel.object);
      const int r = RelationVec(p, rel.relation);
      Vec tmp(d);
      kernels::Hadamard(p.Block(o), p.Block(r), tmp);
      kernels::HadamardAcc(u, tmp, GradBlock(p, g, s));
      kernels::Hadamard(p.Block(s), p.Block(r), tmp);
      kernels::HadamardAcc(u, tmp, GradBlock(p, g, o));
      kernels::Hadamard(p.Block(s), p.Block(o), tmp);
      kernels::HadamardAcc(u, tmp, GradBlock(p, g, r));
      break;
    }
    case ModelKind::kConv: {
      // y = (s (x) o) (x) R
      const int s = ShapeVec(p, rel.subject);
      const int o = ShapeVec(p, rel.object);
      const int r = RelationVec(p, rel.relation);
      const Vec so = Conv(p.Block(s), p.Block(o));
      hrr::CircCorrAcc(so, u, GradBlock(p, g, r));
      const Vec g_so = hrr::CircCorr(p.Block(r), u);
      hrr::CircCorrAcc(p.Block(o), g_so, GradBlock(p, g, s));
      hrr::CircCorrAcc(p.Block(s), g_so, GradBlock(p, g, o));
      break;
    }
    case ModelKind::kTL: {
      // y = s * (R o)
      const int s = ShapeVec(p, rel.subject);
      const int o = ShapeVec(p, rel.object);
      const int r = RelationMat(p, rel.relation);
      Vec ro(d);
      kernels::MatVec(p.Block(r), p.Block(o), ro);
      kernels::HadamardAcc(u, ro, GradBlock(p, g, s));
      Vec g_ro(d);
      kernels::Hadamard(u, p.Block(s), g_ro);
      kernels::Rank1(1.0, g_ro, p.Block(o), GradBlock(p, g, r));
      kernels::MatVecTransposedAcc(p.Block(r), g_ro, GradBlock(p, g, o));
      break;
    }
    case ModelKind::kRF:
      ConvBackward(p, g, ShapeVec(p, rel.subject), RoleVec(p, Role::kSubject),
                   u);
      ConvBackward(p, g, RelationVec(p, rel.relation),
                   RoleVec(p, Role::kRelation), u);
      ConvBackward(p, g, ShapeVec(p, rel.object), RoleVec(p, Role::kObject), u);
      break;
  }
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view ModelKey(ModelKind m) {
  switch (m) {
    case ModelKind::kAdd: return "add";
    case ModelKind::kMult: return "mult";
    case ModelKind::kConv: return "conv";
    case ModelKind::kTL: return "tl";
    case ModelKind::kRF: return "rf";
  }
  return "?";
}

std::string_view ModelDisplayName(ModelKind m) {
  switch (m) {
    case ModelKind::kAdd: return "Add";
    case ModelKind::kMult: return "Mult";
    case ModelKind::kConv: return "Conv";
    case ModelKind::kTL: return "TL";
    case ModelKind::kRF: return "RF";
  }
  return "?";
}

ModelKind ParseModelKind(std::string_view name) {
  const std::string lower = Lower(name);
  for (ModelKind m : kAllModels) {
    if (ModelKey(m) == lower) return m;
  }
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

bool IsCommutative(ModelKind m) {
  return m == ModelKind::kAdd || m == ModelKind::kMult ||
         m == ModelKind::kConv;
}

std::string_view RoleName(Role r) {
  switch (r) {
    case Role::kAdjective: return "adjective";
    case Role::kNoun: return "noun";
    case Role::kSubject: return "subject";
    case Role::kRelation: return "relation";
    case Role::kObject: return "object";
  }
  return "?";
}

bool Vocabulary::Contains(Color c) const {
  return std::find(adjectives.begin(), adjectives.end(), c) != adjectives.end();
}
bool Vocabulary::Contains(Shape s) const {
  return std::find(nouns.begin(), nouns.end(), s) != nouns.end();
}
bool Vocabulary::Contains(RelationKind r) const {
  return std::find(relations.begin(), relations.end(), r) != relations.end();
}

Vocabulary VocabularyFor(DatasetKind kind) {
  Vocabulary v;
  v.nouns.assign(kAllShapes.begin(), kAllShapes.end());
  if (kind == DatasetKind::kRelational) {
    v.relations.assign(kAllRelations.begin(), kAllRelations.end());
  } else {
    v.adjectives.assign(kAllColors.begin(), kAllColors.end());
  }
  return v;
}

ParamLayout MakeLayout(ModelKind model, const Vocabulary& vocab,
                       std::size_t dim) {
  ParamLayout layout;
  layout.color_vec.fill(-1);
  layout.color_mat.fill(-1);
  layout.shape_vec.fill(-1);
  layout.relation_vec.fill(-1);
  layout.relation_mat.fill(-1);
  layout.role_vec.fill(-1);
  const bool matrices = model == ModelKind::kTL;
  for (Color c : vocab.adjectives) {
    const std::string name(ColorName(c));
    if (matrices) {
      layout.color_mat[static_cast<int>(c)] =
          AddBlock(layout, "mat:" + name, dim, dim);
    } else {
      layout.color_vec[static_cast<int>(c)] =
          AddBlock(layout, "vec:" + name, 1, dim);
    }
  }
  for (Shape s : vocab.nouns) {
    layout.shape_vec[static_cast<int>(s)] =
        AddBlock(layout, "vec:" + std::string(ShapeName(s)), 1, dim);
  }
  for (RelationKind r : vocab.relations) {
    const std::string name(RelationName(r));
    if (matrices) {
      layout.relation_mat[static_cast<int>(r)] =
          AddBlock(layout, "mat:" + name, dim, dim);
    } else {
      layout.relation_vec[static_cast<int>(r)] =
          AddBlock(layout, "vec:" + name, 1, dim);
    }
  }
  if (model == ModelKind::kRF) {
    std::vector<Role> roles;
    if (!vocab.adjectives.empty()) {
      roles.push_back(Role::kAdjective);
      roles.push_back(Role::kNoun);
    }
    if (!vocab.relations.empty()) {
      roles.push_back(Role::kSubject);
      roles.push_back(Role::kRelation);
      roles.push_back(Role::kObject);
    }
    for (Role r : roles) {
      layout.role_vec[static_cast<int>(r)] =
          AddBlock(layout, "role:" + std::string(RoleName(r)), 1, dim);
    }
  }
  return layout;
}

std::span<const double> ComposerParams::Block(int index) const {
  const ParamBlock& b = layout.blocks.at(index);
  return {data.data() + b.offset, b.size()};
}

std::span<double> ComposerParams::Block(int index) {
  const ParamBlock& b = layout.blocks.at(index);
  return {data.data() + b.offset, b.size()};
}

void Gradients::Clear() {
  std::fill(data.begin(), data.end(), 0.0);
  std::fill(touched.begin(), touched.end(), 0);
}

ComposerParams InitParams(ModelKind model, const Vocabulary& vocab,
                          std::size_t dim, uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  ComposerParams p;
  p.model = model;
  p.dim = dim;
  p.vocab = vocab;
  p.layout = MakeLayout(model, vocab, dim);
  p.data.assign(p.layout.total, 0.0);
  Rng rng = MakeRng(seed, Stream::kInit, static_cast<uint64_t>(model));
  std::normal_distribution<double> vec_init(
      0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::normal_distribution<double> mat_init(0.0, 0.02);
  for (std::size_t b = 0; b < p.layout.blocks.size(); ++b) {
    const ParamBlock& block = p.layout.blocks[b];
    std::span<double> values = p.Block(static_cast<int>(b));
    if (block.rows == 1) {
      for (double& x : values) x = vec_init(rng);
    } else {
      for (std::size_t r = 0; r < block.rows; ++r) {
        for (std::size_t c = 0; c < block.cols; ++c) {
          values[r * block.cols + c] = (r == c ? 1.0 : 0.0) + mat_init(rng);
        }
      }
    }
  }
  return p;
}

std::size_t ParamCount(ModelKind model, DatasetKind kind, std::size_t dim) {
  return MakeLayout(model, VocabularyFor(kind), dim).total;
}

Embedding Compose(const ComposerParams& params, const Phrase& phrase) {
  if (const auto* an = std::get_if<AdjNoun>(&phrase)) {
    return ComposeAdjNoun(params, *an);
  }
  return ComposeRel(params, std::get<Rel>(phrase));
}

void Backward(const ComposerParams& params, const Phrase& phrase,
              std::span<const double> upstream, Gradients& grads) {
  if (upstream.size() != params.dim) {
    throw DomainError("backward: upstream dimension mismatch");
  }
  if (const auto* an = std::get_if<AdjNoun>(&phrase)) {
    BackwardAdjNoun(params, *an, upstream, grads);
  } else {
    BackwardRel(params, std::get<Rel>(phrase), upstream, grads);
  }
}

void WriteCheckpoint(std::ostream& out, const ComposerParams& params,
                     DatasetKind kind) {
  out << "cbl-checkpoint 1\n";
  out << "model " << ModelKey(params.model) << '\n';
  out << "dataset " << DatasetKindName(kind) << '\n';
  out << "dim " << params.dim << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", params.logit_scale);
  out << "logit_scale " << buf << '\n';
  out << "blocks " << params.layout.blocks.size() << '\n';
  for (std::size_t b = 0; b < params.layout.blocks.size(); ++b) {
    const ParamBlock& block = params.layout.blocks[b];
    out << block.name << ' ' << block.rows << ' ' << block.cols << '\n';
    const auto values = params.Block(static_cast<int>(b));
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
      out << buf << ((i + 1) % block.cols == 0 ? '\n' : ' ');
    }
  }
}

ComposerParams ReadCheckpoint(std::istream& in, DatasetKind* kind_out) {
  const auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw FormatError(std::string("checkpoint: expected '") + key + "'");
    }
  };
  expect("cbl-checkpoint");
  int version = 0;
  if (!(in >> version) || version != 1) {
    throw FormatError("checkpoint: unsupported version");
  }
  std::string model_name;
  std::string kind_name;
  std::size_t dim = 0;
  double logit_scale = 0.0;
  std::size_t num_blocks = 0;
  expect("model");
  in >> model_name;
  expect("dataset");
  in >> kind_name;
  expect("dim");
  in >> dim;
  expect("logit_scale");
  in >> logit_scale;
  expect("blocks");
  in >> num_blocks;
  if (!in) throw FormatError("checkpoint: truncated header");
  ModelKind model;
  DatasetKind kind;
  try {
    model = ParseModelKind(model_name);
    kind = ParseDatasetKind(kind_name);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  if (dim == 0) throw FormatError("checkpoint: zero dimension");
  ComposerParams p;
  p.model = model;
  p.dim = dim;
  p.vocab = VocabularyFor(kind);
  p.layout = MakeLayout(model, p.vocab, dim);
  p.logit_scale = logit_scale;
  p.data.assign(p.layout.total, 0.0);
  if (num_blocks != p.layout.blocks.size()) {
    throw FormatError("checkpoint: block count does not match the model");
  }
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const ParamBlock& block = p.layout.blocks[b];
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(in >> name >> rows >> cols) || name != block.name ||
        rows != block.rows || cols != block.cols) {
      throw FormatError("checkpoint: unexpected block '" + name + "'");
    }
    auto values = p.Block(static_cast<int>(b));
    for (double& v : values) {
      std::string tok;
      if (!(in >> tok)) throw FormatError("checkpoint: truncated block");
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (*end != '\0' || !std::isfinite(v)) {
        throw FormatError("checkpoint: bad value '" + tok + "'");
      }
    }
  }
  if (kind_out != nullptr) *kind_out = kind;
  return p;
}

}  // namespace cbl
