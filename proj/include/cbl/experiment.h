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

#ifndef CBL_EXPERIMENT_H_
#define CBL_EXPERIMENT_H_

// End-to-end experiment driver and the file-level steps the CLI exposes.

#include <cstdint>
#include <string>
#include <vector>

#include "cbl/config.h"
#include "cbl/embed.h"
#include "cbl/scenegen.h"
#include "cbl/train.h"

namespace cbl {

// <out>/<kind>-seed<seed>
std::string RunDirectory(const ExperimentConfig& cfg);

// File name of the cached embeddings for a generated encoder, e.g.
// "embeddings-structured-s0.05-d256.txt". Empty for imported embeddings.
std::string EmbeddingCacheName(const EncoderSpec& spec);

// Builds the dataset, or reads cfg.manifest_path when set.
DatasetManifest LoadOrBuildManifest(const ExperimentConfig& cfg);

// Reads `cache_path` when it exists, otherwise encodes and writes it. An
// empty path disables the cache.
EmbeddingTable LoadOrEncode(const DatasetManifest& manifest,
                            const EncoderSpec& spec, uint64_t seed,
                            const std::string& cache_path);

// Splits off every tenth train example (chosen by a seeded shuffle) as the
// seen-class validation set used for calibration.
struct Holdout {
  DatasetManifest reduced;
  std::vector<Example> seen_validation;
};
Holdout HoldOutTrain(const DatasetManifest& manifest, uint64_t seed);

struct CalibrationRow {
  ModelKind model = ModelKind::kAdd;
  std::vector<double> gammas;  // per seed
  MeanStderr uncalibrated;     // generalization accuracy
  MeanStderr calibrated;
};

// Per seed: picks gamma on (held-out train, validation) and applies it to
// the generalization split.
CalibrationRow CalibrateRun(const RunSummary& summary, const Holdout& holdout,
                            const EmbeddingTable& images,
                            const TrainConfig& cfg);

std::string RenderCalibrationCsv(const std::vector<CalibrationRow>& rows);

struct ExperimentResult {
  std::string run_dir;
  std::vector<RunSummary> summaries;
  std::vector<CalibrationRow> calibration;
  std::vector<std::string> files;  // every file written, relative to run_dir
};

// Writes manifest.jsonl, the embedding cache, config.ini, per model and seed
// history and checkpoint files, reports and summary.json into RunDirectory.
// ConfigError on an invalid config.
ExperimentResult RunExperiment(ExperimentConfig cfg);

// CBL_SEED, when set, replaces cfg.seed. ConfigError when not an integer.
void ApplySeedOverride(ExperimentConfig& cfg);

}  // namespace cbl

#endif  // CBL_EXPERIMENT_H_
