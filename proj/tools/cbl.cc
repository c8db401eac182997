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

// cbl: generate datasets, train composition models, evaluate and report.
//
//   cbl run --dataset relational --model add --model tl --out runs
//   cbl gen --dataset two --out runs
//   cbl eval --checkpoint runs/single-seed1/add/seed1-checkpoint.txt
//   cbl gradcheck --model rf --dim 8

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbl/config.h"
#include "cbl/errors.h"
#include "cbl/experiment.h"
#include "cbl/gradcheck.h"
#include "cbl/report.h"

namespace fs = std::filesystem;
using namespace cbl;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> dataset, encoder, sigma, dim, seeds, epochs, lr,
      weight_decay, batch_size, negatives, tie_policy, out, manifest,
      train_count, val_count, gen_count, formats;
  std::vector<std::string> models;
  bool calibrate = false;
};

void AddCommon(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Config file");
  app->add_option("--dataset", f.dataset, "single | two | relational");
  app->add_option("--encoder", f.encoder, "bag | structured | raster | import:<path>");
  app->add_option("--sigma", f.sigma, "Encoder noise scale");
  app->add_option("--dim", f.dim, "Embedding dimension");
  app->add_option("--model", f.models, "add | mult | conv | tl | rf (repeatable)");
  app->add_option("--seeds", f.seeds, "Training seeds 1..k");
  app->add_option("--epochs", f.epochs);
  app->add_option("--lr", f.lr);
  app->add_option("--weight-decay", f.weight_decay);
  app->add_option("--batch-size", f.batch_size);
  app->add_option("--negatives", f.negatives, "all | <int>");
  app->add_option("--tie-policy", f.tie_policy,
                  "lowest_index | adversarial | random[:<seed>]");
  app->add_flag("--calibrate", f.calibrate, "Calibrated stacking on generalization");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--manifest", f.manifest, "Use this manifest instead of generating");
  app->add_option("--train-count", f.train_count);
  app->add_option("--val-count", f.val_count);
  app->add_option("--gen-count", f.gen_count);
  app->add_option("--formats", f.formats, "csv,md");
}

ExperimentConfig Resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : LoadConfig(f.config);
  auto set = [&](const char* section, const char* key,
                 const std::optional<std::string>& v) {
    if (v) ApplySetting(cfg, section, key, *v);
  };
  if (f.dataset) {
    const SplitCounts before = cfg.counts;
    const DatasetKind old_kind = cfg.kind;
    ApplySetting(cfg, "dataset", "kind", *f.dataset);
    if (cfg.kind != old_kind && before == DefaultCounts(old_kind)) {
      cfg.counts = DefaultCounts(cfg.kind);
    }
  }
  set("dataset", "train", f.train_count);
  set("dataset", "validation", f.val_count);
  set("dataset", "generalization", f.gen_count);
  set("dataset", "manifest", f.manifest);
  set("embed", "encoder", f.encoder);
  set("embed", "sigma", f.sigma);
  set("embed", "dim", f.dim);
  set("train", "seeds", f.seeds);
  set("train", "epochs", f.epochs);
  set("train", "lr", f.lr);
  set("train", "weight_decay", f.weight_decay);
  set("train", "batch_size", f.batch_size);
  set("train", "negatives", f.negatives);
  set("eval", "tie_policy", f.tie_policy);
  set("output", "dir", f.out);
  set("output", "formats", f.formats);
  if (!f.models.empty()) {
    std::string joined;
    for (const auto& m : f.models) joined += (joined.empty() ? "" : ",") + m;
    ApplySetting(cfg, "train", "models", joined);
  }
  if (f.calibrate) cfg.calibrate = true;
  ApplySeedOverride(cfg);
  cfg.Validate();
  return cfg;
}

void PrintSummary(const RunSummary& s) {
  std::printf("%-5s train %6s  val %6s  gen %6s  (adversarial %s / %s / %s)\n",
              std::string(ModelDisplayName(s.model)).c_str(),
              FormatPercent(s.accuracy[0].mean).c_str(),
              FormatPercent(s.accuracy[1].mean).c_str(),
              FormatPercent(s.accuracy[2].mean).c_str(),
              FormatPercent(s.adversarial_accuracy[0].mean).c_str(),
              FormatPercent(s.adversarial_accuracy[1].mean).c_str(),
              FormatPercent(s.adversarial_accuracy[2].mean).c_str());
}

struct Prepared {
  ExperimentConfig cfg;
  std::string dir;
  DatasetManifest manifest;
  EmbeddingTable images;
};

Prepared Prepare(const CommonFlags& f) {
  Prepared p{Resolve(f), "", {}, {}};
  p.dir = RunDirectory(p.cfg);
  fs::create_directories(p.dir);
  p.manifest = LoadOrBuildManifest(p.cfg);
  const std::string cache = EmbeddingCacheName(p.cfg.encoder);
  p.images = LoadOrEncode(p.manifest, p.cfg.encoder, p.cfg.seed,
                          cache.empty() ? "" : (fs::path(p.dir) / cache).string());
  if (p.images.empty()) throw ConfigError("no image embeddings");
  p.cfg.train.dim = p.images.begin()->second.size();
  return p;
}

int CmdGen(const CommonFlags& f) {
  const ExperimentConfig cfg = Resolve(f);
  const fs::path dir = RunDirectory(cfg);
  fs::create_directories(dir);
  const DatasetManifest m = BuildDataset(cfg.kind, cfg.counts, cfg.seed);
  std::ofstream out(dir / "manifest.jsonl", std::ios::binary);
  WriteManifest(out, m);
  std::printf("%s (%zu examples)\n", (dir / "manifest.jsonl").c_str(),
              m.TotalExamples());
  return 0;
}

int CmdTrain(const CommonFlags& f) {
  Prepared p = Prepare(f);
  std::vector<RunSummary> summaries;
  for (ModelKind model : p.cfg.models) {
    RunSummary s = RunSeeds(model, p.manifest, p.images, p.cfg.train);
    const fs::path model_dir = fs::path(p.dir) / std::string(ModelKey(model));
    fs::create_directories(model_dir);
    for (const SeedResult& sr : s.seeds) {
      const std::string stem = "seed" + std::to_string(sr.seed);
      std::ofstream h(model_dir / (stem + "-history.csv"), std::ios::binary);
      WriteHistoryCsv(h, sr.history);
      std::ofstream c(model_dir / (stem + "-checkpoint.txt"), std::ios::binary);
      WriteCheckpoint(c, sr.params, p.manifest.kind);
    }
    PrintSummary(s);
    summaries.push_back(std::move(s));
  }
  std::ofstream out(fs::path(p.dir) / "summary.json", std::ios::binary);
  WriteSummaryJson(out, p.manifest.kind, summaries);
  return 0;
}

int CmdEval(const CommonFlags& f, const std::string& checkpoint,
            const std::string& predictions_path) {
  Prepared p = Prepare(f);
  std::ifstream in(checkpoint);
  if (!in) throw ConfigError("cannot open checkpoint '" + checkpoint + "'");
  DatasetKind ckpt_kind{};
  const ComposerParams params = ReadCheckpoint(in, &ckpt_kind);
  if (ckpt_kind != p.manifest.kind) {
    throw ConfigError("checkpoint was trained on the " +
                      std::string(DatasetKindName(ckpt_kind)) + " dataset");
  }
  std::ofstream pred_out;
  if (!predictions_path.empty()) {
    pred_out.open(predictions_path, std::ios::binary);
    pred_out << "id,split,true,predicted,tie,s0,s1,s2,s3,s4\n";
  }
  const TieBreak adversarial{TiePolicy::kAdversarial, 0};
  for (Split split : kAllSplits) {
    const auto preds = PredictSplit(params, p.manifest.Examples(split), p.images,
                                    p.cfg.train, p.cfg.train.tie);
    std::vector<Prediction> adv;
    for (const Prediction& pr : preds) adv.push_back(Resolve(pr, adversarial));
    const SplitAccuracy a = EvaluateSplit(preds);
    std::printf("%-14s n=%-6zu acc %6s  adversarial %6s  ties %6s\n",
                std::string(SplitName(split)).c_str(), a.total,
                FormatPercent(a.accuracy()).c_str(),
                FormatPercent(EvaluateSplit(adv).accuracy()).c_str(),
                FormatPercent(a.tie_rate()).c_str());
    if (pred_out.is_open()) {
      for (const Prediction& pr : preds) {
        pred_out << pr.id << ',' << SplitName(split) << ','
                 << PhraseToString(pr.true_phrase()) << ','
                 << PhraseToString(pr.predicted_phrase()) << ',' << pr.tie;
        for (double s : pr.scores) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.17g", s);
          pred_out << ',' << buf;
        }
        pred_out << '\n';
      }
    }
  }
  return 0;
}

int CmdReport(const std::string& summary_path, const CommonFlags& f) {
  std::ifstream in(summary_path);
  if (!in) throw ConfigError("cannot open summary '" + summary_path + "'");
  DatasetKind kind{};
  const auto summaries = ReadSummaryJson(in, &kind);
  std::set<ReportFormat> formats = {ReportFormat::kCsv, ReportFormat::kMarkdown};
  if (f.formats) {
    ExperimentConfig tmp;
    ApplySetting(tmp, "output", "formats", *f.formats);
    formats = tmp.formats;
  }
  const std::string dir =
      f.out ? *f.out : fs::path(summary_path).parent_path().string();
  fs::create_directories(dir.empty() ? "." : dir);
  for (const auto& path : EmitReport(summaries, kind, formats, dir.empty() ? "." : dir)) {
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

int CmdGradcheck(const CommonFlags& f, std::size_t trials, double tolerance) {
  ExperimentConfig cfg = Resolve(f);
  const std::size_t dim = f.dim ? cfg.encoder.dim : 8;
  GradCheckOptions opts;
  opts.trials = trials;
  opts.seed = cfg.seed;
  bool ok = true;
  for (ModelKind model : cfg.models) {
    const GradCheckResult r = CheckGradients(model, cfg.kind, dim, opts);
    const bool pass = r.max_rel_error < tolerance && r.max_loss_rel_error < tolerance;
    ok = ok && pass;
    std::printf("%-5s d=%zu trials=%zu compose %.3g  loss %.3g  %s\n",
                std::string(ModelDisplayName(model)).c_str(), dim, r.trials,
                r.max_rel_error, r.max_loss_rel_error, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

int CmdRun(const CommonFlags& f) {
  const ExperimentResult r = RunExperiment(Resolve(f));
  for (const RunSummary& s : r.summaries) PrintSummary(s);
  for (const CalibrationRow& c : r.calibration) {
    std::printf("%-5s gen calibrated %s (uncalibrated %s)\n",
                std::string(ModelDisplayName(c.model)).c_str(),
                FormatPercent(c.calibrated.mean).c_str(),
                FormatPercent(c.uncalibrated.mean).c_str());
  }
  std::printf("wrote %zu files to %s\n", r.files.size(), r.run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-binding laboratory for compositional models"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, report_f, grad_f, run_f;
  auto* gen = app.add_subcommand("gen", "Generate a dataset manifest");
  AddCommon(gen, gen_f);
  auto* train = app.add_subcommand("train", "Train models and write checkpoints");
  AddCommon(train, train_f);
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on every split");
  AddCommon(eval, eval_f);
  std::string checkpoint, predictions;
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--predictions", predictions, "Write per-example scores as CSV");
  auto* report = app.add_subcommand("report", "Render tables from summary.json");
  std::string summary_path;
  report->add_option("--summary", summary_path)->required();
  report->add_option("--out", report_f.out);
  report->add_option("--formats", report_f.formats);
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  AddCommon(grad, grad_f);
  std::size_t trials = 100;
  double tolerance = 1e-5;
  grad->add_option("--trials", trials);
  grad->add_option("--tolerance", tolerance);
  auto* run = app.add_subcommand("run", "Generate, train, evaluate and report");
  AddCommon(run, run_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return CmdGen(gen_f);
    if (train->parsed()) return CmdTrain(train_f);
    if (eval->parsed()) return CmdEval(eval_f, checkpoint, predictions);
    if (report->parsed()) return CmdReport(summary_path, report_f);
    if (grad->parsed()) return CmdGradcheck(grad_f, trials, tolerance);
    if (run->parsed()) return CmdRun(run_f);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "cbl: configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cbl: %s\n", e.what());
    return 1;
  }
  return 0;
}
