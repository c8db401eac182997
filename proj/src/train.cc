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

#include "cbl/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cbl/errors.h"
#include "cbl/kernels.h"
#include "cbl/rng.h"

namespace cbl {
namespace {

struct BatchItem {
  std::span<const double> image;
  const Phrase* true_phrase;
  std::span<const Phrase> negatives;
};

std::span<const double> LookupImage(const EmbeddingTable& images,
                                    const std::string& id) {
  auto it = images.find(id);
  if (it == images.end()) throw FormatError("no image embedding for '" + id + "'");
  return it->second;
}

// Phrase embeddings composed once per batch, with their norms.
class PhraseCache {
 public:
  int Index(const ComposerParams& params, const Phrase& p) {
    auto [it, inserted] = index_.emplace(p, static_cast<int>(phrases_.size()));
    if (inserted) {
      phrases_.push_back(p);
      embeddings_.push_back(Compose(params, p));
      norms_.push_back(Norm(embeddings_.back()));
    }
    return it->second;
  }
  const Phrase& phrase(int i) const { return phrases_[i]; }
  const Embedding& embedding(int i) const { return embeddings_[i]; }
  double norm(int i) const { return norms_[i]; }
  std::size_t size() const { return phrases_.size(); }

 private:
  std::map<Phrase, int> index_;
  std::vector<Phrase> phrases_;
  std::vector<Embedding> embeddings_;
  std::vector<double> norms_;
};

double ScoreCached(std::span<const double> image, double image_norm,
                   const PhraseCache& cache, int idx, const TrainConfig& cfg) {
  const double dot = kernels::Dot(image, cache.embedding(idx));
  if (!cfg.score_normalization) return dot;
  const double denom = image_norm * cache.norm(idx);
  if (!(denom > 0.0)) throw DomainError("score of a zero vector");
  return cfg.logit_scale * dot / denom;
}

// upstream += coeff * d(score)/d(phrase embedding)
void AccumulateScoreGrad(std::span<const double> image, double image_norm,
                         const PhraseCache& cache, int idx,
                         const TrainConfig& cfg, double coeff,
                         std::span<double> upstream) {
  if (!cfg.score_normalization) {
    kernels::Axpy(coeff, image, upstream);
    return;
  }
  // s = L x.t / (|x||t|);  ds/dt = L/(|x||t|) * (x - (x.t / |t|^2) t)
  const Embedding& t = cache.embedding(idx);
  const double tn = cache.norm(idx);
  const double dot = kernels::Dot(image, t);
  const double k = cfg.logit_scale / (image_norm * tn);
  kernels::Axpy(coeff * k, image, upstream);
  kernels::Axpy(-coeff * k * dot / (tn * tn), t, upstream);
}

// Mean loss over the batch plus the L2 penalty; gradients of the same
// quantity are accumulated into `grads` (which must be clear).
double BatchLossAndGrad(const ComposerParams& params,
                        std::span<const BatchItem> items,
                        const TrainConfig& cfg, Gradients& grads) {
  PhraseCache cache;
  std::vector<std::vector<int>> cand_idx(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    cand_idx[i].push_back(cache.Index(params, *items[i].true_phrase));
    for (const Phrase& n : items[i].negatives) {
      cand_idx[i].push_back(cache.Index(params, n));
    }
  }
  std::vector<Embedding> upstream(cache.size(), Embedding(params.dim, 0.0));
  const double inv_b = 1.0 / static_cast<double>(items.size());
  double loss = 0.0;
  std::vector<double> scores;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const BatchItem& item = items[i];
    if (item.negatives.empty()) throw ContractError("no negatives for example");
    const double image_norm = Norm(item.image);
    const auto& idx = cand_idx[i];
    scores.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      scores[k] = ScoreCached(item.image, image_norm, cache, idx[k], cfg);
    }
    std::vector<double> dscore(idx.size(), 0.0);
    if (cfg.softmax == SoftmaxForm::kStandard) {
      const double top = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (double s : scores) z += std::exp(s - top);
      const double log_z = top + std::log(z);
      loss += (log_z - scores[0]) * inv_b;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        dscore[k] = std::exp(scores[k] - log_z) - (k == 0 ? 1.0 : 0.0);
      }
    } else {
      for (std::size_t k = 1; k < idx.size(); ++k) {
        loss += scores[k] * inv_b;
        dscore[k] = 1.0;
      }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (dscore[k] == 0.0) continue;
      AccumulateScoreGrad(item.image, image_norm, cache, idx[k], cfg,
                          dscore[k] * inv_b, upstream[idx[k]]);
    }
  }
  for (std::size_t p = 0; p < cache.size(); ++p) {
    Backward(params, cache.phrase(static_cast<int>(p)), upstream[p], grads);
  }
  if (cfg.weight_decay != 0.0) {
    for (std::size_t b = 0; b < grads.touched.size(); ++b) {
      if (!grads.touched[b]) continue;
      const auto theta = params.Block(static_cast<int>(b));
      const ParamBlock& block = params.layout.blocks[b];
      std::span<double> g(grads.data.data() + block.offset, block.size());
      loss += cfg.weight_decay * kernels::Dot(theta, theta);
      kernels::Axpy(2.0 * cfg.weight_decay, theta, g);
    }
  }
  return loss;
}

void CheckVocabulary(const ComposerParams& params,
                     std::span<const Phrase> classes) {
  for (const Phrase& p : classes) {
    bool ok = true;
    if (const auto* an = std::get_if<AdjNoun>(&p)) {
      ok = params.vocab.Contains(an->adjective) && params.vocab.Contains(an->noun);
    } else {
      const Rel& r = std::get<Rel>(p);
      ok = params.vocab.Contains(r.subject) && params.vocab.Contains(r.object) &&
           params.vocab.Contains(r.relation);
    }
    if (!ok) {
      throw ConfigError("class '" + PhraseToString(p) +
                        "' is outside the model vocabulary");
    }
  }
}

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg)
      : m_(n, 0.0), v_(n, 0.0), cfg_(cfg) {}

  void Step(std::vector<double>& params, const std::vector<double>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
    kernels::Active().adam(params.data(), grads.data(), m_.data(), v_.data(),
                           params.size(), cfg_.learning_rate / bc1,
                           cfg_.adam_beta1, cfg_.adam_beta2, 1.0 / bc2,
                           cfg_.adam_eps);
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  const TrainConfig& cfg_;
  std::size_t t_ = 0;
};

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (seeds == 0) throw ConfigError("seeds must be positive");
  if (dim == 0) throw ConfigError("dimension must be positive");
  if (!(logit_scale > 0.0)) throw ConfigError("logit scale must be positive");
}

double Score(std::span<const double> image, std::span<const double> phrase,
             const TrainConfig& cfg) {
  if (image.size() != phrase.size()) throw DomainError("score: dimension mismatch");
  const double dot = kernels::Dot(image, phrase);
  if (!cfg.score_normalization) return dot;
  const double denom = Norm(image) * Norm(phrase);
  if (!(denom > 0.0)) throw DomainError("score of a zero vector");
  return cfg.logit_scale * dot / denom;
}

LossResult LossExample(std::span<const double> image, const Phrase& true_phrase,
                       std::span<const Phrase> negatives,
                       const ComposerParams& params, const TrainConfig& cfg) {
  LossResult result{0.0, Gradients(params)};
  const BatchItem item{image, &true_phrase, negatives};
  result.loss = BatchLossAndGrad(params, {&item, 1}, cfg, result.grads);
  return result;
}

std::size_t SelectCheckpoint(const TrainHistory& history) {
  if (history.epochs.empty()) throw ContractError("empty training history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.epochs.size(); ++i) {
    if (history.epochs[i].val_accuracy > history.epochs[best].val_accuracy) {
      best = i;
    }
  }
  return history.epochs[best].epoch;
}

std::vector<Phrase> TrainingNegatives(const Example& ex,
                                      std::span<const Phrase> split_classes) {
  std::vector<Phrase> out;
  for (const Phrase& p : split_classes) {
    if (p == ex.true_phrase) continue;
    if (RelationHolds(ex.scene, p)) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<Prediction> PredictSplit(const ComposerParams& params,
                                     std::span<const Example> examples,
                                     const EmbeddingTable& images,
                                     const TrainConfig& cfg,
                                     const TieBreak& tie) {
  PhraseCache cache;
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    const auto image = LookupImage(images, ex.id);
    const double image_norm = Norm(image);
    const auto candidates = ex.Candidates();
    std::array<double, kNumCandidates> scores{};
    for (int k = 0; k < kNumCandidates; ++k) {
      scores[k] = ScoreCached(image, image_norm, cache,
                              cache.Index(params, candidates[k]), cfg);
    }
    out.push_back(MakePrediction(ex.id, candidates, scores, tie));
  }
  return out;
}

TrainResult TrainModel(ModelKind model, const DatasetManifest& manifest,
                       const EmbeddingTable& images, const TrainConfig& cfg,
                       uint64_t seed) {
  cfg.Validate();
  const auto& train = manifest.Examples(Split::kTrain);
  const auto& val = manifest.Examples(Split::kValidation);
  if (train.empty()) throw ConfigError("train split is empty");

  ComposerParams params =
      InitParams(model, VocabularyFor(manifest.kind), cfg.dim, seed);
  params.logit_scale = cfg.logit_scale;
  for (Split s : kAllSplits) CheckVocabulary(params, manifest.Classes(s));

  std::vector<std::span<const double>> train_images;
  std::vector<std::vector<Phrase>> all_negatives;
  for (const Example& ex : train) {
    train_images.push_back(LookupImage(images, ex.id));
    if (train_images.back().size() != cfg.dim) {
      throw ConfigError("image dimension " +
                        std::to_string(train_images.back().size()) +
                        " does not match model dimension " +
                        std::to_string(cfg.dim));
    }
    all_negatives.push_back(
        TrainingNegatives(ex, manifest.Classes(Split::kTrain)));
    if (all_negatives.back().empty()) {
      throw ConfigError("train split has a single class; no negatives");
    }
  }

  TrainResult result{params, params, 0, {seed, {}}};
  Gradients grads(params);
  Adam adam(params.data.size(), cfg);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<Phrase>> sampled(train.size());
  double best_val = -1.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle = MakeRng(seed, Stream::kShuffle, epoch);
    std::shuffle(order.begin(), order.end(), shuffle);
    double epoch_loss = 0.0;
    std::vector<BatchItem> batch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t e = order[i];
        std::span<const Phrase> negs = all_negatives[e];
        if (cfg.negatives > 0 && cfg.negatives < negs.size()) {
          Rng rng = MakeRng(DeriveSeed(seed, epoch), Stream::kNegatives, e);
          std::vector<Phrase> pool(negs.begin(), negs.end());
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
          }
          pool.resize(cfg.negatives);
          sampled[e] = std::move(pool);
          negs = sampled[e];
        }
        batch.push_back({train_images[e], &train[e].true_phrase, negs});
      }
      grads.Clear();
      const double loss = BatchLossAndGrad(params, batch, cfg, grads);
      epoch_loss += loss * static_cast<double>(batch.size());
      adam.Step(params.data, grads.data);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train.size());
    rec.train_accuracy =
        EvaluateSplit(PredictSplit(params, train, images, cfg, cfg.tie))
            .accuracy();
    rec.val_accuracy =
        EvaluateSplit(PredictSplit(params, val, images, cfg, cfg.tie))
            .accuracy();
    result.history.epochs.push_back(rec);
    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      result.selected_params = params;
      result.selected_epoch = epoch;
    }
  }
  result.final_params = std::move(params);
  return result;
}

MeanStderr Aggregate(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double k = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  if (values.size() < 2) return out;
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); })) {
    out.mean = values.front();
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stderr_ = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  return out;
}

double SwapTieRate(std::span<const Prediction> predictions) {
  if (predictions.empty()) return 0.0;
  std::size_t ties = 0;
  for (const Prediction& p : predictions) {
    const Rel* truth = std::get_if<Rel>(&p.true_phrase());
    if (truth == nullptr) return 0.0;
    const Phrase swapped = Rel{truth->object, truth->relation, truth->subject};
    for (int k = 0; k < kNumCandidates; ++k) {
      if (p.candidates[k] == swapped &&
          std::fabs(p.scores[k] - p.scores[p.true_index]) <= 1e-9) {
        ++ties;
        break;
      }
    }
  }
  return static_cast<double>(ties) / static_cast<double>(predictions.size());
}

RunSummary RunSeeds(ModelKind model, const DatasetManifest& manifest,
                    const EmbeddingTable& images, const TrainConfig& cfg) {
  cfg.Validate();
  RunSummary summary;
  summary.model = model;
  summary.taxonomy.relational = manifest.kind == DatasetKind::kRelational;
  const TieBreak adversarial{TiePolicy::kAdversarial, 0};
  std::array<std::vector<double>, 3> acc;
  std::array<std::vector<double>, 3> adv;
  for (uint64_t seed = 1; seed <= cfg.seeds; ++seed) {
    TrainResult run = TrainModel(model, manifest, images, cfg, seed);
    SeedResult sr;
    sr.seed = seed;
    sr.selected_epoch = run.selected_epoch;
    sr.history = std::move(run.history);
    sr.params = std::move(run.selected_params);
    for (Split split : kAllSplits) {
      const auto i = static_cast<std::size_t>(split);
      auto preds =
          PredictSplit(sr.params, manifest.Examples(split), images, cfg, cfg.tie);
      const SplitAccuracy a = EvaluateSplit(preds);
      sr.accuracy[i] = a.accuracy();
      sr.tie_rate[i] = a.tie_rate();
      std::vector<Prediction> adv_preds;
      adv_preds.reserve(preds.size());
      for (const Prediction& p : preds) adv_preds.push_back(Resolve(p, adversarial));
      sr.adversarial_accuracy[i] = EvaluateSplit(adv_preds).accuracy();
      acc[i].push_back(sr.accuracy[i]);
      adv[i].push_back(sr.adversarial_accuracy[i]);
      summary.tie_rate[i] += sr.tie_rate[i] / static_cast<double>(cfg.seeds);
      if (manifest.kind == DatasetKind::kRelational) {
        sr.swap_tie_rate[i] = SwapTieRate(preds);
        summary.swap_tie_rate[i] +=
            sr.swap_tie_rate[i] / static_cast<double>(cfg.seeds);
      }
      if (split == Split::kGeneralization) {
        summary.taxonomy.Merge(
            TallyErrors(preds, manifest.kind == DatasetKind::kRelational));
        sr.generalization_predictions = std::move(preds);
      }
    }
    summary.seeds.push_back(std::move(sr));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    summary.accuracy[i] = Aggregate(acc[i]);
    summary.adversarial_accuracy[i] = Aggregate(adv[i]);
  }
  return summary;
}

}  // namespace cbl
