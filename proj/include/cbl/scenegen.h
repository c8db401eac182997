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

#ifndef CBL_SCENEGEN_H_
#define CBL_SCENEGEN_H_

// Procedural generation of the single-object, two-object and relational
// datasets: class splits, scene sampling, distractor construction, and the
// JSONL manifest format.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cbl/rng.h"
#include "cbl/scene.h"

namespace cbl {

// Margin for relation truth, in scene units.
inline constexpr double kTau = 0.5;
inline constexpr double kCoordLimit = 3.0;
inline constexpr double kMinSize = 0.3;
inline constexpr double kMaxSize = 0.7;
inline constexpr int kMaxSampleAttempts = 1000;
inline constexpr int kManifestVersion = 1;

// True iff `p` describes `scene`. An AdjNoun holds when some object has that
// color and shape. Rel(s, R, o) holds when objects of shapes s and o exist
// and their coordinates satisfy R with margin tau:
//   left:   x_s + tau <= x_o      right:  x_s >= x_o + tau
//   front:  z_s + tau <= z_o      behind: z_s >= z_o + tau
bool RelationHolds(const Scene& scene, const Phrase& p, double tau = kTau);

// Single-object scene for an AdjNoun class, or a two-object relational scene
// for a Rel class. Relational scenes separate the objects along the
// relation's axis only (off-axis offset < tau) and give them random distinct
// colors. Throws GenerationError after kMaxSampleAttempts rejections.
Scene SampleScene(const Phrase& cls, Rng& rng);

// Two-object attribute scene holding both classes. Shapes and colors must
// differ (ContractError otherwise). Object order is randomized.
Scene SampleTwoObjectScene(const AdjNoun& first, const AdjNoun& second,
                           Rng& rng);

// The 4 distractors for `true_phrase` on `scene`:
//   single:     4 distinct draws from the 23 other color-shape pairs
//   two:        the two attribute swaps with the other object, plus 2 draws
//               from the 24 pairs minus both true labels and both swaps
//   relational: {bRa, aSb, aRc, cRb} for true aRb, S = opposite(R)
std::array<Phrase, kNumDistractors> MakeDistractors(DatasetKind kind,
                                                    const Phrase& true_phrase,
                                                    const Scene& scene,
                                                    Rng& rng);

// All 24 classes of a dataset kind in canonical order.
std::vector<Phrase> ClassUniverse(DatasetKind kind);
// The fixed class list of one split.
std::vector<Phrase> SplitClasses(DatasetKind kind, Split split);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t generalization = 0;

  std::size_t operator[](Split s) const;
  bool operator==(const SplitCounts&) const = default;
};

// Per-split example totals of the reference datasets.
SplitCounts DefaultCounts(DatasetKind kind);

struct DatasetManifest {
  DatasetKind kind = DatasetKind::kSingle;
  uint64_t seed = 0;
  double tau = kTau;
  std::array<std::vector<Phrase>, 3> classes;
  std::array<std::vector<Example>, 3> examples;

  const std::vector<Phrase>& Classes(Split s) const {
    return classes[static_cast<std::size_t>(s)];
  }
  const std::vector<Example>& Examples(Split s) const {
    return examples[static_cast<std::size_t>(s)];
  }
  std::vector<Example>& Examples(Split s) {
    return examples[static_cast<std::size_t>(s)];
  }
  std::size_t TotalExamples() const;

  bool operator==(const DatasetManifest&) const = default;
};

// Deterministic in (kind, counts, seed). Example j of a split has class
// j mod (#classes), so totals spread as evenly as possible, and draws from
// its own RNG stream derived from (seed, split, j).
DatasetManifest BuildDataset(DatasetKind kind, const SplitCounts& counts,
                             uint64_t seed);

// JSONL: one header object, then one object per example.
void WriteManifest(std::ostream& out, const DatasetManifest& manifest);
// Throws FormatError.
DatasetManifest ReadManifest(std::istream& in);

}  // namespace cbl

#endif  // CBL_SCENEGEN_H_
