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

#include "cbl/embed.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "cbl/circular.h"
#include "cbl/errors.h"
#include "cbl/kernels.h"

namespace cbl {
namespace {

// Isotropic noise with per-component std sigma / sqrt(d), so the expected
// noise norm is sigma on the same scale as the unit concept codes.
void AddNoise(Embedding& v, double sigma, Rng* rng) {
  if (sigma == 0.0) return;
  if (rng == nullptr) throw ContractError("noise requested without an RNG");
  std::normal_distribution<double> normal(
      0.0, sigma / std::sqrt(static_cast<double>(v.size())));
  for (double& x : v) x += normal(*rng);
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<const SceneObject*> ByShape(const Scene& scene) {
  std::vector<const SceneObject*> objs;
  for (const SceneObject& o : scene.objects) objs.push_back(&o);
  std::stable_sort(objs.begin(), objs.end(),
                   [](const SceneObject* a, const SceneObject* b) {
                     return a->shape < b->shape;
                   });
  return objs;
}

struct Rgb {
  double r, g, b;
};

Rgb ColorRgb(Color c) {
  switch (c) {
    case Color::kBlue: return {42 / 255.0, 75 / 255.0, 215 / 255.0};
    case Color::kGray: return {87 / 255.0, 87 / 255.0, 87 / 255.0};
    case Color::kYellow: return {255 / 255.0, 238 / 255.0, 51 / 255.0};
    case Color::kBrown: return {129 / 255.0, 74 / 255.0, 25 / 255.0};
    case Color::kGreen: return {29 / 255.0, 105 / 255.0, 20 / 255.0};
    case Color::kPurple: return {129 / 255.0, 38 / 255.0, 192 / 255.0};
    case Color::kRed: return {173 / 255.0, 35 / 255.0, 35 / 255.0};
    case Color::kCyan: return {41 / 255.0, 208 / 255.0, 208 / 255.0};
  }
  return {0, 0, 0};
}

}  // namespace

std::string_view RankRoleName(RankRole r) {
  switch (r) {
    case RankRole::kLeftmost: return "leftmost";
    case RankRole::kRightmost: return "rightmost";
    case RankRole::kFrontmost: return "frontmost";
    case RankRole::kBackmost: return "backmost";
  }
  return "?";
}

double Norm(std::span<const double> v) { return std::sqrt(kernels::Dot(v, v)); }

Embedding Normalize(std::span<const double> v) {
  const double n = Norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DomainError("cannot normalize a zero or non-finite vector");
  }
  Embedding out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine: dimension mismatch");
  const double na = Norm(a);
  const double nb = Norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("cosine of zero vector");
  return kernels::Dot(a, b) / (na * nb);
}

ConceptTable::ConceptTable(uint64_t seed, std::size_t dim)
    : seed_(seed), dim_(dim), codes_(kNumEntries * dim) {
  if (dim == 0) throw ConfigError("concept table dimension must be positive");
  Rng rng = MakeRng(seed, Stream::kConcepts, dim);
  std::normal_distribution<double> normal(
      0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (std::size_t e = 0; e < kNumEntries; ++e) {
    std::span<double> row(codes_.data() + e * dim, dim);
    for (double& x : row) x = normal(rng);
    const Embedding unit = Normalize(row);
    std::copy(unit.begin(), unit.end(), row.begin());
  }
}

std::span<const double> ConceptTable::Row(std::size_t index) const {
  return {codes_.data() + index * dim_, dim_};
}
std::span<const double> ConceptTable::operator[](Shape s) const {
  return Row(static_cast<std::size_t>(s));
}
std::span<const double> ConceptTable::operator[](Color c) const {
  return Row(3 + static_cast<std::size_t>(c));
}
std::span<const double> ConceptTable::operator[](RelationKind r) const {
  return Row(11 + static_cast<std::size_t>(r));
}
std::span<const double> ConceptTable::operator[](RankRole r) const {
  return Row(15 + static_cast<std::size_t>(r));
}

Embedding EncodeBag(const Scene& scene, const ConceptTable& table,
                    double noise_sigma, Rng* noise) {
  // Summed by concept in table order, never by object, so any two scenes
  // with the same multiset of colors and shapes give identical bits.
  std::array<int, 3> shape_count{};
  std::array<int, 8> color_count{};
  for (const SceneObject& o : scene.objects) {
    ++shape_count[static_cast<std::size_t>(o.shape)];
    ++color_count[static_cast<std::size_t>(o.color)];
  }
  Embedding out(table.dim(), 0.0);
  for (Shape s : kAllShapes) {
    const int n = shape_count[static_cast<std::size_t>(s)];
    if (n > 0) kernels::Axpy(static_cast<double>(n), table[s], out);
  }
  for (Color c : kAllColors) {
    const int n = color_count[static_cast<std::size_t>(c)];
    if (n > 0) kernels::Axpy(static_cast<double>(n), table[c], out);
  }
  AddNoise(out, noise_sigma, noise);
  return out;
}

Embedding EncodeStructured(const Scene& scene, const ConceptTable& table,
                           double noise_sigma, Rng* noise) {
  const std::size_t d = table.dim();
  Embedding out(d, 0.0);
  std::vector<double> term(d);
  const auto objs = ByShape(scene);
  for (const SceneObject* o : objs) {
    hrr::CircConvInto(table[o->color], table[o->shape], term);
    kernels::Add(out, term, out);
  }
  if (objs.size() == 2) {
    const SceneObject* a = objs[0];
    const SceneObject* b = objs[1];
    const bool a_left = a->x <= b->x;
    const bool a_front = a->z <= b->z;
    const auto bind_roles = [&](const SceneObject* o, bool leftmost,
                                bool frontmost) {
      hrr::CircConvInto(table[o->shape],
                        table[leftmost ? RankRole::kLeftmost
                                       : RankRole::kRightmost],
                        term);
      kernels::Add(out, term, out);
      hrr::CircConvInto(table[o->shape],
                        table[frontmost ? RankRole::kFrontmost
                                        : RankRole::kBackmost],
                        term);
      kernels::Add(out, term, out);
    };
    bind_roles(a, a_left, a_front);
    bind_roles(b, !a_left, !a_front);
  }
  AddNoise(out, noise_sigma, noise);
  return out;
}

RasterEncoder::RasterEncoder(std::size_t grid, std::size_t dim,
                             uint64_t projection_seed)
    : grid_(grid), dim_(dim) {
  if (grid < 8) throw ConfigError("raster grid must be at least 8");
  if (dim == 0) throw ConfigError("raster dimension must be positive");
  const std::size_t pixels = grid * grid * 3;
  projection_.resize(dim * pixels);
  Rng rng = MakeRng(projection_seed, Stream::kProjection, grid * 4096 + dim);
  std::normal_distribution<double> normal(
      0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (double& x : projection_) x = normal(rng);
}

std::vector<double> RasterEncoder::Rasterize(const Scene& scene) const {
  const std::size_t g = grid_;
  std::vector<double> canvas(g * g * 3, 0.0);
  std::vector<const SceneObject*> order;
  for (const SceneObject& o : scene.objects) order.push_back(&o);
  // Back (large z) first so nearer objects paint over it.
  std::stable_sort(order.begin(), order.end(),
                   [](const SceneObject* a, const SceneObject* b) {
                     return a->z > b->z;
                   });
  const double scale = static_cast<double>(g) / (2.0 * kCoordLimit);
  for (const SceneObject* o : order) {
    const double cx = (o->x + kCoordLimit) * scale;
    const double cy = (kCoordLimit - o->z) * scale;
    const double r = o->size * scale;
    const Rgb rgb = ColorRgb(o->color);
    for (std::size_t row = 0; row < g; ++row) {
      for (std::size_t col = 0; col < g; ++col) {
        const double px = static_cast<double>(col) + 0.5 - cx;
        const double py = static_cast<double>(row) + 0.5 - cy;
        bool inside = false;
        switch (o->shape) {
          case Shape::kSphere:
            inside = px * px + py * py <= r * r;
            break;
          case Shape::kCube:
            inside = std::abs(px) <= r && std::abs(py) <= r;
            break;
          case Shape::kCylinder: {
            // Apex up; half-width grows linearly to r at the base.
            const double t = (py + r) / (2.0 * r);
            inside = t >= 0.0 && t <= 1.0 && std::abs(px) <= r * t;
            break;
          }
        }
        if (!inside) continue;
        double* px_out = &canvas[(row * g + col) * 3];
        px_out[0] = rgb.r;
        px_out[1] = rgb.g;
        px_out[2] = rgb.b;
      }
    }
  }
  return canvas;
}

Embedding RasterEncoder::Encode(const Scene& scene) const {
  const std::vector<double> canvas = Rasterize(scene);
  Embedding out(dim_);
  kernels::MatVec(projection_, canvas, out);
  return out;
}

EmbeddingTable ReadEmbeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("embeddings: empty file");
  std::size_t dim = 0;
  std::size_t count = 0;
  if (std::sscanf(line.c_str(), "dim=%zu count=%zu", &dim, &count) != 2 ||
      dim == 0) {
    throw FormatError("embeddings: bad header '" + line + "'");
  }
  EmbeddingTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id;
    row >> id;
    Embedding values;
    std::string tok;
    while (row >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw FormatError("embeddings line " + std::to_string(line_no) +
                          ": not a number '" + tok + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError("embeddings line " + std::to_string(line_no) +
                          ": non-finite value");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw FormatError("embeddings line " + std::to_string(line_no) +
                        ": expected " + std::to_string(dim) + " values, got " +
                        std::to_string(values.size()));
    }
    if (!table.emplace(id, std::move(values)).second) {
      throw FormatError("embeddings: duplicate id '" + id + "'");
    }
  }
  if (table.size() != count) {
    throw FormatError("embeddings: header count " + std::to_string(count) +
                      " but " + std::to_string(table.size()) + " rows");
  }
  return table;
}

void WriteEmbeddings(std::ostream& out, const EmbeddingTable& table) {
  const std::size_t dim = table.empty() ? 0 : table.begin()->second.size();
  out << "dim=" << dim << " count=" << table.size() << '\n';
  char buf[32];
  for (const auto& [id, values] : table) {
    if (values.size() != dim) throw DomainError("ragged embedding table");
    out << id;
    for (double v : values) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

EncoderSpec ParseEncoderSpec(const std::string& text) {
  EncoderSpec spec;
  if (text == "bag") {
    spec.kind = EncoderKind::kBag;
  } else if (text == "structured") {
    spec.kind = EncoderKind::kStructured;
  } else if (text == "raster") {
    spec.kind = EncoderKind::kRaster;
  } else if (text.rfind("import:", 0) == 0 && text.size() > 7) {
    spec.kind = EncoderKind::kImport;
    spec.import_path = text.substr(7);
  } else {
    throw ConfigError("unknown encoder '" + text + "'");
  }
  return spec;
}

std::string EncoderSpecName(const EncoderSpec& spec) {
  switch (spec.kind) {
    case EncoderKind::kBag: return "bag";
    case EncoderKind::kStructured: return "structured";
    case EncoderKind::kRaster: return "raster";
    case EncoderKind::kImport: return "import:" + spec.import_path;
  }
  return "?";
}

EmbeddingTable EncodeManifest(const DatasetManifest& manifest,
                              const EncoderSpec& spec, uint64_t seed) {
  if (spec.kind == EncoderKind::kImport) {
    std::ifstream in(spec.import_path);
    if (!in) throw ConfigError("cannot open embeddings '" + spec.import_path + "'");
    EmbeddingTable table = ReadEmbeddings(in);
    for (Split split : kAllSplits) {
      for (const Example& ex : manifest.Examples(split)) {
        if (!table.count(ex.id)) {
          throw FormatError("embeddings: missing id '" + ex.id + "'");
        }
      }
    }
    return table;
  }
  if (spec.dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingTable table;
  const ConceptTable concepts(DeriveSeed(seed, 1), spec.dim);
  std::unique_ptr<RasterEncoder> raster;
  if (spec.kind == EncoderKind::kRaster) {
    raster = std::make_unique<RasterEncoder>(spec.grid, spec.dim, seed);
  }
  for (Split split : kAllSplits) {
    for (const Example& ex : manifest.Examples(split)) {
      Rng noise = MakeRng(seed, Stream::kNoise, Fnv1a(ex.id));
      switch (spec.kind) {
        case EncoderKind::kBag:
          table[ex.id] = EncodeBag(ex.scene, concepts, spec.noise_sigma, &noise);
          break;
        case EncoderKind::kStructured:
          table[ex.id] =
              EncodeStructured(ex.scene, concepts, spec.noise_sigma, &noise);
          break;
        case EncoderKind::kRaster:
          table[ex.id] = raster->Encode(ex.scene);
          break;
        case EncoderKind::kImport:
          break;
      }
    }
  }
  return table;
}

}  // namespace cbl
