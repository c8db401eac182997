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

#ifndef CBL_REPORT_H_
#define CBL_REPORT_H_

// Accuracy and error-taxonomy tables in CSV and Markdown, plus a JSON
// summary that the `report` subcommand can re-render without retraining.

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "cbl/scene.h"
#include "cbl/train.h"

namespace cbl {

enum class ReportFormat : uint8_t { kCsv, kMarkdown };

// "csv" or "md"/"markdown". ConfigError otherwise.
ReportFormat ParseReportFormat(std::string_view name);

// Percent with 2 decimals, e.g. "85.16".
std::string FormatPercent(double fraction);

std::string RenderAccuracyCsv(const std::vector<RunSummary>& summaries);
std::string RenderAccuracyMarkdown(const std::vector<RunSummary>& summaries);
std::string RenderTaxonomyCsv(const std::vector<RunSummary>& summaries,
                              bool relational);
std::string RenderTaxonomyMarkdown(const std::vector<RunSummary>& summaries,
                                   bool relational);

// Writes accuracy.<ext> and taxonomy.<ext> for every requested format into
// `dir`. Returns the written paths. ContractError on empty summaries.
std::vector<std::string> EmitReport(const std::vector<RunSummary>& summaries,
                                    DatasetKind kind,
                                    const std::set<ReportFormat>& formats,
                                    const std::string& dir);

// Per-model aggregates only (no parameters or predictions).
void WriteSummaryJson(std::ostream& out, DatasetKind kind,
                      const std::vector<RunSummary>& summaries);
// Throws FormatError.
std::vector<RunSummary> ReadSummaryJson(std::istream& in, DatasetKind* kind);

// epoch,train_loss,train_acc,val_acc
void WriteHistoryCsv(std::ostream& out, const TrainHistory& history);

}  // namespace cbl

#endif  // CBL_REPORT_H_
