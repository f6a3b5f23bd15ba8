// Copyright 2026 The kgrec Authors
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
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgrec {

// Every knob of a pipeline run, parsed from a flat key = value document.
// Defaults follow the documented schema; paths are resolved against the
// config file's directory.
struct PipelineConfig {
  std::filesystem::path ratings_path;
  std::filesystem::path triples_path;
  std::filesystem::path mapping_path;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> blacklist_path;
  // Explicit predicate blacklist; overrides blacklist_path and the default.
  std::optional<std::vector<std::string>> blacklist;

  double rating_threshold = 3.0;
  std::size_t core = 10;
  double split_ratio = 0.8;
  std::uint64_t seed = 42;
  int threads = 1;

  int depth = 2;
  std::size_t min_items = 10;
  std::size_t per_hop_limit = 100;  // 0 = unlimited
  double ig_cutoff = 0.0;
  // Hop depths whose features the users may retain; nullopt = all up to
  // depth, empty = none (a content-free model).
  std::optional<std::vector<int>> hops;

  int dim = 10;
  double learning_rate = 0.01;
  int epochs = 30;
  double l2 = 0.0;
  double init_scale = 0.1;

  std::size_t top_k = 10;
  std::vector<std::size_t> cutoffs = {10, 1};
  double popularity_ratio = 0.8;
  std::vector<std::size_t> semantics_ks = {5, 10, 50, 100, 0};
};

// Carries every violation found in a config document, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A failure inside a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Parses and validates; throws ConfigError listing every violation.
// `overrides` are key=value pairs applied on top of the document.
PipelineConfig validate_config(
    const std::string& text, const std::filesystem::path& base_dir,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

PipelineConfig load_config(
    const std::filesystem::path& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

enum class Stage {
  kExtract,
  kWeights,
  kTrain,
  kRecommend,
  kEvaluate,
};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::vector<double> epoch_losses;
};

// Runs the pipeline through `last_stage`, writing each stage's artifacts
// under output_dir. Artifacts are written to a `.partial` file first and
// renamed once complete; a stage failure aborts with a StageError and leaves
// the marker in place. A loadable manifest is written on success.
RunResult run_pipeline(const PipelineConfig& config, Stage last_stage,
                       std::ostream& log);

}  // namespace kgrec
