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

#ifndef CBL_EMBED_H_
#define CBL_EMBED_H_

// Frozen image embeddings. Three oracle encoders stand in for a pretrained
// image tower:
//   bag        - sum of color and shape concept vectors, blind to binding
//   structured - color (x) shape bindings plus shape (x) rank-role bindings
//   raster     - a small rendered canvas under a fixed random projection
// plus a text interchange format for embeddings computed elsewhere.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cbl/rng.h"
#include "cbl/scene.h"
#include "cbl/scenegen.h"

namespace cbl {

using Embedding = std::vector<double>;

inline constexpr std::size_t kDefaultDim = 256;
inline constexpr double kDefaultNoiseSigma = 0.05;

// Position roles for two-object scenes.
enum class RankRole : uint8_t { kLeftmost, kRightmost, kFrontmost, kBackmost };
std::string_view RankRoleName(RankRole r);

// Throws DomainError on a zero (or non-finite) norm.
Embedding Normalize(std::span<const double> v);
double Norm(std::span<const double> v);
double Cosine(std::span<const double> a, std::span<const double> b);

// Unit-norm Gaussian code per shape, color, relation and rank role. Frozen
// once built; deterministic in (seed, dim).
class ConceptTable {
 public:
  ConceptTable(uint64_t seed, std::size_t dim);

  std::span<const double> operator[](Shape s) const;
  std::span<const double> operator[](Color c) const;
  std::span<const double> operator[](RelationKind r) const;
  std::span<const double> operator[](RankRole r) const;

  uint64_t seed() const { return seed_; }
  std::size_t dim() const { return dim_; }

  static constexpr std::size_t kNumEntries = 3 + 8 + 4 + 4;

 private:
  std::span<const double> Row(std::size_t index) const;

  uint64_t seed_;
  std::size_t dim_;
  std::vector<double> codes_;  // kNumEntries x dim
};

// `noise` may be null when sigma == 0.
Embedding EncodeBag(const Scene& scene, const ConceptTable& table,
                    double noise_sigma, Rng* noise);
Embedding EncodeStructured(const Scene& scene, const ConceptTable& table,
                           double noise_sigma, Rng* noise);

class RasterEncoder {
 public:
  // Throws ConfigError when grid < 8 or dim == 0.
  RasterEncoder(std::size_t grid, std::size_t dim, uint64_t projection_seed);

  // grid x grid x 3 canvas, row-major, RGB in [0, 1]. Row 0 is the back of
  // the scene; objects are painted back to front.
  std::vector<double> Rasterize(const Scene& scene) const;
  Embedding Encode(const Scene& scene) const;

  std::size_t grid() const { return grid_; }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t grid_;
  std::size_t dim_;
  std::vector<double> projection_;  // dim x (grid * grid * 3)
};

// Example id -> embedding. Ordered so exports are reproducible.
using EmbeddingTable = std::map<std::string, Embedding>;

// Interchange format: a "dim=<d> count=<n>" line, then n lines of
// "<id> f1 ... fd". Throws FormatError on dimension or count mismatch,
// duplicate ids, or non-finite values.
EmbeddingTable ReadEmbeddings(std::istream& in);
void WriteEmbeddings(std::ostream& out, const EmbeddingTable& table);

enum class EncoderKind : uint8_t { kBag, kStructured, kRaster, kImport };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::kStructured;
  double noise_sigma = kDefaultNoiseSigma;
  std::size_t dim = kDefaultDim;
  std::size_t grid = 16;
  std::string import_path;
};

// Parses "bag", "structured", "raster" or "import:<path>". ConfigError.
EncoderSpec ParseEncoderSpec(const std::string& text);
std::string EncoderSpecName(const EncoderSpec& spec);

// Embeds every example of the manifest once. Concept codes, projection and
// per-example noise streams are derived from `seed`. For kImport the file is
// read and must cover every example id.
EmbeddingTable EncodeManifest(const DatasetManifest& manifest,
                              const EncoderSpec& spec, uint64_t seed);

}  // namespace cbl

#endif  // CBL_EMBED_H_
