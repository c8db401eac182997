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

#include "cbl/report.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cbl/errors.h"

namespace cbl {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<const char*, 3> kSplitLabels = {"Train", "Val", "Gen"};

std::vector<std::string> TaxonomyColumns(bool relational) {
  if (relational) return {"bRa", "aSb", "aRc", "cRb"};
  return {"Adj", "Noun", "Both"};
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

std::string RenderAccuracyCsv(const std::vector<RunSummary>& summaries) {
  std::ostringstream out;
  out << "model,train,train_se,val,val_se,gen,gen_se,"
         "train_adv,val_adv,gen_adv,train_tie_rate,val_tie_rate,gen_tie_rate,"
         "train_swap_tie_rate,val_swap_tie_rate,gen_swap_tie_rate\n";
  for (const RunSummary& s : summaries) {
    out << ModelDisplayName(s.model);
    for (std::size_t i = 0; i < 3; ++i) {
      out << ',' << FormatPercent(s.accuracy[i].mean) << ','
          << FormatPercent(s.accuracy[i].stderr_);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      out << ',' << FormatPercent(s.adversarial_accuracy[i].mean);
    }
    for (std::size_t i = 0; i < 3; ++i) out << ',' << FormatPercent(s.tie_rate[i]);
    for (std::size_t i = 0; i < 3; ++i) {
      out << ',' << FormatPercent(s.swap_tie_rate[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string RenderAccuracyMarkdown(const std::vector<RunSummary>& summaries) {
  std::ostringstream out;
  out << "| Model | Train | Val | Gen |\n|---|---:|---:|---:|\n";
  for (const RunSummary& s : summaries) {
    out << "| " << ModelDisplayName(s.model);
    for (std::size_t i = 0; i < 3; ++i) {
      out << " | " << FormatPercent(s.accuracy[i].mean) << "<sub>"
          << FormatPercent(s.accuracy[i].stderr_) << "</sub>";
    }
    out << " |\n";
  }
  out << "\nAdversarial tie policy (every exact tie with the true label counted "
         "as an error), with the rate of tied top scores:\n\n";
  out << "| Model | Train | Val | Gen | Ties (Train/Val/Gen) |\n"
         "|---|---:|---:|---:|---:|\n";
  for (const RunSummary& s : summaries) {
    out << "| " << ModelDisplayName(s.model);
    for (std::size_t i = 0; i < 3; ++i) {
      out << " | " << FormatPercent(s.adversarial_accuracy[i].mean) << "<sub>"
          << FormatPercent(s.adversarial_accuracy[i].stderr_) << "</sub>";
    }
    out << " | " << FormatPercent(s.tie_rate[0]) << " / "
        << FormatPercent(s.tie_rate[1]) << " / " << FormatPercent(s.tie_rate[2])
        << " |\n";
  }
  if (!summaries.empty() && summaries.front().taxonomy.relational) {
    out << "\nTrue label tied with its bRa distractor:\n\n"
           "| Model | Train | Val | Gen |\n|---|---:|---:|---:|\n";
    for (const RunSummary& s : summaries) {
      out << "| " << ModelDisplayName(s.model);
      for (double r : s.swap_tie_rate) out << " | " << FormatPercent(r);
      out << " |\n";
    }
  }
  return out.str();
}

std::string RenderTaxonomyCsv(const std::vector<RunSummary>& summaries,
                              bool relational) {
  const auto cols = TaxonomyColumns(relational);
  std::ostringstream out;
  out << "model";
  for (const auto& c : cols) out << ',' << c;
  out << ",errors\n";
  for (const RunSummary& s : summaries) {
    out << ModelDisplayName(s.model);
    const auto pct = s.taxonomy.Percentages();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      char buf[32];
      if (pct.empty()) {
        out << ",-";
      } else {
        std::snprintf(buf, sizeof(buf), "%.2f", pct[i]);
        out << ',' << buf;
      }
    }
    out << ',' << s.taxonomy.errors() << '\n';
  }
  return out.str();
}

std::string RenderTaxonomyMarkdown(const std::vector<RunSummary>& summaries,
                                   bool relational) {
  const auto cols = TaxonomyColumns(relational);
  std::ostringstream out;
  out << "| Model |";
  for (const auto& c : cols) out << ' ' << c << " |";
  out << " Errors |\n|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "---:|";
  out << "---:|\n";
  for (const RunSummary& s : summaries) {
    out << "| " << ModelDisplayName(s.model) << " |";
    const auto pct = s.taxonomy.Percentages();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      char buf[32];
      if (pct.empty()) {
        out << " - |";
      } else {
        std::snprintf(buf, sizeof(buf), " %.2f |", pct[i]);
        out << buf;
      }
    }
    out << ' ' << s.taxonomy.errors() << " |\n";
  }
  return out.str();
}

std::vector<std::string> EmitReport(const std::vector<RunSummary>& summaries,
                                    DatasetKind kind,
                                    const std::set<ReportFormat>& formats,
                                    const std::string& dir) {
  if (summaries.empty()) throw ContractError("nothing to report");
  const bool relational = kind == DatasetKind::kRelational;
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (ReportFormat f : formats) {
    const bool csv = f == ReportFormat::kCsv;
    const std::string ext = csv ? ".csv" : ".md";
    const auto acc = std::filesystem::path(dir) / ("accuracy" + ext);
    const auto tax = std::filesystem::path(dir) / ("taxonomy" + ext);
    WriteFile(acc, csv ? RenderAccuracyCsv(summaries)
                       : RenderAccuracyMarkdown(summaries));
    WriteFile(tax, csv ? RenderTaxonomyCsv(summaries, relational)
                       : RenderTaxonomyMarkdown(summaries, relational));
    written.push_back(acc.string());
    written.push_back(tax.string());
  }
  return written;
}

void WriteSummaryJson(std::ostream& out, DatasetKind kind,
                      const std::vector<RunSummary>& summaries) {
  Json root;
  root["schema"] = "cbl-summary";
  root["version"] = 1;
  root["dataset"] = DatasetKindName(kind);
  Json models = Json::array();
  for (const RunSummary& s : summaries) {
    Json m;
    m["model"] = ModelKey(s.model);
    for (Split split : kAllSplits) {
      const auto i = static_cast<std::size_t>(split);
      Json e;
      e["mean"] = s.accuracy[i].mean;
      e["stderr"] = s.accuracy[i].stderr_;
      e["adversarial_mean"] = s.adversarial_accuracy[i].mean;
      e["adversarial_stderr"] = s.adversarial_accuracy[i].stderr_;
      e["tie_rate"] = s.tie_rate[i];
      e["swap_tie_rate"] = s.swap_tie_rate[i];
      m["splits"][std::string(SplitName(split))] = e;
    }
    m["taxonomy"] = s.taxonomy.counts;
    Json seeds = Json::array();
    for (const SeedResult& r : s.seeds) {
      seeds.push_back({{"seed", r.seed},
                       {"selected_epoch", r.selected_epoch},
                       {"accuracy", r.accuracy},
                       {"adversarial_accuracy", r.adversarial_accuracy}});
    }
    m["seeds"] = std::move(seeds);
    models.push_back(std::move(m));
  }
  root["models"] = std::move(models);
  out << root.dump(2) << '\n';
}

std::vector<RunSummary> ReadSummaryJson(std::istream& in, DatasetKind* kind) {
  std::vector<RunSummary> out;
  try {
    const Json root = Json::parse(in);
    if (root.at("schema").get<std::string>() != "cbl-summary") {
      throw FormatError("not a summary file");
    }
    const DatasetKind k = ParseDatasetKind(root.at("dataset").get<std::string>());
    if (kind != nullptr) *kind = k;
    for (const Json& m : root.at("models")) {
      RunSummary s;
      s.model = ParseModelKind(m.at("model").get<std::string>());
      for (Split split : kAllSplits) {
        const auto i = static_cast<std::size_t>(split);
        const Json& e = m.at("splits").at(std::string(SplitName(split)));
        s.accuracy[i] = {e.at("mean").get<double>(), e.at("stderr").get<double>()};
        s.adversarial_accuracy[i] = {e.at("adversarial_mean").get<double>(),
                                     e.at("adversarial_stderr").get<double>()};
        s.tie_rate[i] = e.at("tie_rate").get<double>();
        s.swap_tie_rate[i] = e.value("swap_tie_rate", 0.0);
      }
      s.taxonomy.relational = k == DatasetKind::kRelational;
      s.taxonomy.counts = m.at("taxonomy").get<std::array<std::size_t, 4>>();
      for (const Json& r : m.at("seeds")) {
        SeedResult sr;
        sr.seed = r.at("seed").get<uint64_t>();
        sr.selected_epoch = r.at("selected_epoch").get<std::size_t>();
        sr.accuracy = r.at("accuracy").get<std::array<double, 3>>();
        sr.adversarial_accuracy =
            r.at("adversarial_accuracy").get<std::array<double, 3>>();
        s.seeds.push_back(std::move(sr));
      }
      out.push_back(std::move(s));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("summary: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("summary: ") + e.what());
  }
  return out;
}

void WriteHistoryCsv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_loss,train_acc,val_acc\n";
  char buf[128];
  for (const EpochRecord& r : history.epochs) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f\n", r.epoch,
                  r.train_loss, r.train_accuracy, r.val_accuracy);
    out << buf;
  }
}

}  // namespace cbl
