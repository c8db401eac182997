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

#include "cbl/config.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cbl/errors.h"

namespace cbl {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

uint64_t ParseUnsigned(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-') {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<uint64_t>(x);
}

double ParseDouble(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::Validate() const {
  train.Validate();
  if (models.empty()) throw ConfigError("no models requested");
  if (formats.empty()) throw ConfigError("no report formats requested");
  if (out_dir.empty()) throw ConfigError("output directory is empty");
  if (encoder.noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (encoder.kind == EncoderKind::kRaster && encoder.grid < 8) {
    throw ConfigError("raster grid must be at least 8");
  }
  if (calibrate && kind == DatasetKind::kRelational) {
    throw ConfigError("calibration is not defined for the relational dataset");
  }
}

void ApplySetting(ExperimentConfig& cfg, const std::string& section,
                  const std::string& key, const std::string& value) {
  const std::string name = section + "." + key;
  if (section == "dataset") {
    if (key == "kind") {
      cfg.kind = ParseDatasetKind(value);
    } else if (key == "train") {
      cfg.counts.train = ParseUnsigned(name, value);
    } else if (key == "validation") {
      cfg.counts.validation = ParseUnsigned(name, value);
    } else if (key == "generalization") {
      cfg.counts.generalization = ParseUnsigned(name, value);
    } else if (key == "seed") {
      cfg.seed = ParseUnsigned(name, value);
    } else if (key == "manifest") {
      cfg.manifest_path = value;
    } else {
      throw ConfigError("unknown key '" + name + "'");
    }
  } else if (section == "embed") {
    if (key == "encoder") {
      const EncoderSpec parsed = ParseEncoderSpec(value);
      cfg.encoder.kind = parsed.kind;
      cfg.encoder.import_path = parsed.import_path;
    } else if (key == "sigma") {
      cfg.encoder.noise_sigma = ParseDouble(name, value);
    } else if (key == "dim") {
      cfg.encoder.dim = ParseUnsigned(name, value);
      cfg.train.dim = cfg.encoder.dim;
    } else if (key == "grid") {
      cfg.encoder.grid = ParseUnsigned(name, value);
    } else {
      throw ConfigError("unknown key '" + name + "'");
    }
  } else if (section == "train") {
    TrainConfig& t = cfg.train;
    if (key == "models") {
      cfg.models.clear();
      for (const auto& m : SplitList(value)) cfg.models.push_back(ParseModelKind(m));
    } else if (key == "lr") {
      t.learning_rate = ParseDouble(name, value);
    } else if (key == "weight_decay") {
      t.weight_decay = ParseDouble(name, value);
    } else if (key == "batch_size") {
      t.batch_size = ParseUnsigned(name, value);
    } else if (key == "epochs") {
      t.epochs = ParseUnsigned(name, value);
    } else if (key == "negatives") {
      t.negatives = value == "all" ? 0 : ParseUnsigned(name, value);
      if (value != "all" && t.negatives == 0) {
        throw ConfigError(name + ": must be 'all' or at least 1");
      }
    } else if (key == "seeds") {
      t.seeds = ParseUnsigned(name, value);
    } else if (key == "normalize") {
      t.score_normalization = ParseBool(name, value);
    } else if (key == "logit_scale") {
      t.logit_scale = ParseDouble(name, value);
    } else if (key == "softmax") {
      if (value == "standard") {
        t.softmax = SoftmaxForm::kStandard;
      } else if (value == "literal") {
        t.softmax = SoftmaxForm::kLiteral;
      } else {
        throw ConfigError(name + ": expected 'standard' or 'literal'");
      }
    } else {
      throw ConfigError("unknown key '" + name + "'");
    }
  } else if (section == "eval") {
    if (key == "tie_policy") {
      cfg.train.tie = ParseTieBreak(value);
    } else if (key == "calibrate") {
      cfg.calibrate = ParseBool(name, value);
    } else {
      throw ConfigError("unknown key '" + name + "'");
    }
  } else if (section == "output") {
    if (key == "dir") {
      cfg.out_dir = value;
    } else if (key == "formats") {
      cfg.formats.clear();
      for (const auto& f : SplitList(value)) cfg.formats.insert(ParseReportFormat(f));
    } else {
      throw ConfigError("unknown key '" + name + "'");
    }
  } else {
    throw ConfigError("unknown section '" + section + "'");
  }
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig cfg;
  bool counts_given = false;
  std::string section;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    line = Trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = Trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      if (section.empty()) throw ConfigError("setting outside of a section");
      const std::string key = Trim(line.substr(0, eq));
      const std::string value = Trim(line.substr(eq + 1));
      if (section == "dataset" &&
          (key == "train" || key == "validation" || key == "generalization")) {
        if (!counts_given) {
          cfg.counts = {};
          counts_given = true;
        }
      }
      ApplySetting(cfg, section, key, value);
      if (section == "dataset" && key == "kind" && !counts_given) {
        cfg.counts = DefaultCounts(cfg.kind);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return ParseConfig(in);
}

void WriteConfig(std::ostream& out, const ExperimentConfig& cfg) {
  out << "[dataset]\n";
  out << "kind = " << DatasetKindName(cfg.kind) << '\n';
  out << "train = " << cfg.counts.train << '\n';
  out << "validation = " << cfg.counts.validation << '\n';
  out << "generalization = " << cfg.counts.generalization << '\n';
  out << "seed = " << cfg.seed << '\n';
  if (!cfg.manifest_path.empty()) out << "manifest = " << cfg.manifest_path << '\n';
  out << "\n[embed]\n";
  out << "encoder = " << EncoderSpecName(cfg.encoder) << '\n';
  out << "sigma = " << Num(cfg.encoder.noise_sigma) << '\n';
  out << "dim = " << cfg.encoder.dim << '\n';
  out << "grid = " << cfg.encoder.grid << '\n';
  out << "\n[train]\n";
  out << "models = ";
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    out << (i ? "," : "") << ModelKey(cfg.models[i]);
  }
  out << '\n';
  const TrainConfig& t = cfg.train;
  out << "lr = " << Num(t.learning_rate) << '\n';
  out << "weight_decay = " << Num(t.weight_decay) << '\n';
  out << "batch_size = " << t.batch_size << '\n';
  out << "epochs = " << t.epochs << '\n';
  out << "negatives = "
      << (t.negatives == 0 ? std::string("all") : std::to_string(t.negatives))
      << '\n';
  out << "seeds = " << t.seeds << '\n';
  out << "normalize = " << (t.score_normalization ? "true" : "false") << '\n';
  out << "logit_scale = " << Num(t.logit_scale) << '\n';
  out << "softmax = "
      << (t.softmax == SoftmaxForm::kStandard ? "standard" : "literal") << '\n';
  out << "\n[eval]\n";
  out << "tie_policy = " << TieBreakName(t.tie) << '\n';
  out << "calibrate = " << (cfg.calibrate ? "true" : "false") << '\n';
  out << "\n[output]\n";
  out << "dir = " << cfg.out_dir << '\n';
  out << "formats = ";
  bool first = true;
  for (ReportFormat f : cfg.formats) {
    out << (first ? "" : ",") << (f == ReportFormat::kCsv ? "csv" : "md");
    first = false;
  }
  out << '\n';
}

}  // namespace cbl
