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

#ifndef CBL_CONFIG_H_
#define CBL_CONFIG_H_

// Experiment configuration and its flat key-value file format:
//
//   [dataset]
//   kind = single
//   train = 5598
//   ...
//   [train]
//   models = add,conv
//
// Blank lines and lines starting with '#' or ';' are ignored. Unknown
// sections or keys are configuration errors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbl/compose.h"
#include "cbl/embed.h"
#include "cbl/report.h"
#include "cbl/scenegen.h"
#include "cbl/train.h"

namespace cbl {

struct ExperimentConfig {
  DatasetKind kind = DatasetKind::kSingle;
  SplitCounts counts = DefaultCounts(DatasetKind::kSingle);
  uint64_t seed = 1;
  // Load this manifest instead of generating one.
  std::string manifest_path;
  EncoderSpec encoder;
  std::vector<ModelKind> models = {kAllModels.begin(), kAllModels.end()};
  TrainConfig train;
  bool calibrate = false;
  std::string out_dir = "runs";
  std::set<ReportFormat> formats = {ReportFormat::kCsv, ReportFormat::kMarkdown};

  // Throws ConfigError.
  void Validate() const;
};

// Throws ConfigError with the offending line number.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::string& path);
void WriteConfig(std::ostream& out, const ExperimentConfig& cfg);

// Sets a single `section.key` (used by both the file parser and CLI flags).
void ApplySetting(ExperimentConfig& cfg, const std::string& section,
                  const std::string& key, const std::string& value);

}  // namespace cbl

#endif  // CBL_CONFIG_H_
