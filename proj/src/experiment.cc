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

#include "cbl/experiment.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cbl/errors.h"
#include "cbl/report.h"

namespace cbl {
namespace fs = std::filesystem;
namespace {

std::string Compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string RunDirectory(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / (std::string(DatasetKindName(cfg.kind)) +
                                   "-seed" + std::to_string(cfg.seed)))
      .string();
}

std::string EmbeddingCacheName(const EncoderSpec& spec) {
  if (spec.kind == EncoderKind::kImport) return "";
  std::string name = "embeddings-" + EncoderSpecName(spec);
  if (spec.kind == EncoderKind::kRaster) {
    name += "-g" + std::to_string(spec.grid);
  } else {
    name += "-s" + Compact(spec.noise_sigma);
  }
  return name + "-d" + std::to_string(spec.dim) + ".txt";
}

DatasetManifest LoadOrBuildManifest(const ExperimentConfig& cfg) {
  if (cfg.manifest_path.empty()) return BuildDataset(cfg.kind, cfg.counts, cfg.seed);
  std::ifstream in(cfg.manifest_path);
  if (!in) throw ConfigError("cannot open manifest '" + cfg.manifest_path + "'");
  DatasetManifest m = ReadManifest(in);
  if (m.kind != cfg.kind) {
    throw ConfigError("manifest kind '" + std::string(DatasetKindName(m.kind)) +
                      "' does not match configured kind '" +
                      std::string(DatasetKindName(cfg.kind)) + "'");
  }
  return m;
}

EmbeddingTable LoadOrEncode(const DatasetManifest& manifest,
                            const EncoderSpec& spec, uint64_t seed,
                            const std::string& cache_path) {
  if (!cache_path.empty() && fs::exists(cache_path)) {
    std::ifstream in(cache_path);
    EmbeddingTable table = ReadEmbeddings(in);
    bool complete = true;
    for (Split split : kAllSplits) {
      for (const Example& ex : manifest.Examples(split)) {
        complete = complete && table.count(ex.id) > 0;
      }
    }
    if (complete && (table.empty() || table.begin()->second.size() == spec.dim)) {
      return table;
    }
  }
  EmbeddingTable table = EncodeManifest(manifest, spec, seed);
  if (!cache_path.empty()) {
    std::ofstream out = OpenOut(cache_path);
    WriteEmbeddings(out, table);
  }
  return table;
}

Holdout HoldOutTrain(const DatasetManifest& manifest, uint64_t seed) {
  Holdout h;
  h.reduced = manifest;
  const auto& train = manifest.Examples(Split::kTrain);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed, Stream::kHoldout);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_hold = train.size() / 10;
  std::vector<bool> held(train.size(), false);
  for (std::size_t i = 0; i < n_hold; ++i) held[order[i]] = true;
  auto& kept = h.reduced.Examples(Split::kTrain);
  kept.clear();
  for (std::size_t i = 0; i < train.size(); ++i) {
    (held[i] ? h.seen_validation : kept).push_back(train[i]);
  }
  return h;
}

CalibrationRow CalibrateRun(const RunSummary& summary, const Holdout& holdout,
                            const EmbeddingTable& images,
                            const TrainConfig& cfg) {
  const DatasetManifest& m = holdout.reduced;
  const auto& train_classes = m.Classes(Split::kTrain);
  const std::set<Phrase> seen(train_classes.begin(), train_classes.end());
  CalibrationRow row;
  row.model = summary.model;
  std::vector<double> before;
  std::vector<double> after;
  for (const SeedResult& sr : summary.seeds) {
    const auto seen_val =
        PredictSplit(sr.params, holdout.seen_validation, images, cfg, cfg.tie);
    const auto unseen_val = PredictSplit(
        sr.params, m.Examples(Split::kValidation), images, cfg, cfg.tie);
    const CalibrationResult cal = Calibrate(seen_val, unseen_val, seen, cfg.tie);
    const auto& gen = sr.generalization_predictions;
    const auto calibrated = ApplyCalibration(gen, cal.gamma, seen, cfg.tie);
    row.gammas.push_back(cal.gamma);
    before.push_back(EvaluateSplit(gen).accuracy());
    after.push_back(EvaluateSplit(calibrated).accuracy());
  }
  row.uncalibrated = Aggregate(before);
  row.calibrated = Aggregate(after);
  return row;
}

std::string RenderCalibrationCsv(const std::vector<CalibrationRow>& rows) {
  std::ostringstream out;
  out << "model,gen_uncalibrated,gen_uncalibrated_se,gen_calibrated,"
         "gen_calibrated_se,gammas\n";
  for (const CalibrationRow& r : rows) {
    out << ModelDisplayName(r.model) << ',' << FormatPercent(r.uncalibrated.mean)
        << ',' << FormatPercent(r.uncalibrated.stderr_) << ','
        << FormatPercent(r.calibrated.mean) << ','
        << FormatPercent(r.calibrated.stderr_) << ',';
    for (std::size_t i = 0; i < r.gammas.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", r.gammas[i]);
      out << (i ? ";" : "") << buf;
    }
    out << '\n';
  }
  return out.str();
}

void ApplySeedOverride(ExperimentConfig& cfg) {
  const char* env = std::getenv("CBL_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') {
    throw ConfigError("CBL_SEED must be a non-negative integer, got '" +
                      std::string(env) + "'");
  }
  cfg.seed = v;
}

ExperimentResult RunExperiment(ExperimentConfig cfg) {
  cfg.Validate();
  ExperimentResult result;
  result.run_dir = RunDirectory(cfg);
  const fs::path dir(result.run_dir);
  fs::create_directories(dir);
  auto record = [&](const std::string& rel) { result.files.push_back(rel); };

  DatasetManifest manifest = LoadOrBuildManifest(cfg);
  {
    std::ofstream out = OpenOut(dir / "manifest.jsonl");
    WriteManifest(out, manifest);
    record("manifest.jsonl");
  }
  const std::string cache = EmbeddingCacheName(cfg.encoder);
  const EmbeddingTable images = LoadOrEncode(
      manifest, cfg.encoder, cfg.seed, cache.empty() ? "" : (dir / cache).string());
  if (!cache.empty()) record(cache);
  if (images.empty()) throw ConfigError("no image embeddings");
  cfg.train.dim = images.begin()->second.size();
  cfg.encoder.dim = cfg.train.dim;
  {
    std::ofstream out = OpenOut(dir / "config.ini");
    WriteConfig(out, cfg);
    record("config.ini");
  }

  Holdout holdout;
  const DatasetManifest* train_on = &manifest;
  if (cfg.calibrate) {
    holdout = HoldOutTrain(manifest, cfg.seed);
    train_on = &holdout.reduced;
  }

  for (ModelKind model : cfg.models) {
    RunSummary summary = RunSeeds(model, *train_on, images, cfg.train);
    const fs::path model_dir = dir / std::string(ModelKey(model));
    fs::create_directories(model_dir);
    for (const SeedResult& sr : summary.seeds) {
      const std::string stem = "seed" + std::to_string(sr.seed);
      {
        std::ofstream out = OpenOut(model_dir / (stem + "-history.csv"));
        WriteHistoryCsv(out, sr.history);
      }
      {
        std::ofstream out = OpenOut(model_dir / (stem + "-checkpoint.txt"));
        WriteCheckpoint(out, sr.params, manifest.kind);
      }
      record(std::string(ModelKey(model)) + "/" + stem + "-history.csv");
      record(std::string(ModelKey(model)) + "/" + stem + "-checkpoint.txt");
    }
    if (cfg.calibrate) {
      result.calibration.push_back(
          CalibrateRun(summary, holdout, images, cfg.train));
    }
    result.summaries.push_back(std::move(summary));
  }

  for (const std::string& path :
       EmitReport(result.summaries, manifest.kind, cfg.formats, dir.string())) {
    record(fs::path(path).filename().string());
  }
  {
    std::ofstream out = OpenOut(dir / "summary.json");
    WriteSummaryJson(out, manifest.kind, result.summaries);
    record("summary.json");
  }
  if (cfg.calibrate) {
    std::ofstream out = OpenOut(dir / "calibration.csv");
    out << RenderCalibrationCsv(result.calibration);
    record("calibration.csv");
  }
  return result;
}

}  // namespace cbl
