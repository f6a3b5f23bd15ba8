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

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "kgrec/pipeline.hpp"
#include "kgrec/version.hpp"

namespace {

struct SubcommandArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void attach_options(CLI::App* cmd, SubcommandArgs& args) {
  cmd->add_option("--config", args.config_path, "pipeline config file")
      ->required();
  cmd->add_option("--override", args.overrides,
                  "key=value applied on top of the config; repeatable");
}

int run_stage(const SubcommandArgs& args, kgrec::Stage last_stage) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& entry : args.overrides) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "config error: override must be key=value, got '" << entry
                << "'\n";
      return 1;
    }
    overrides.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }

  kgrec::PipelineConfig config;
  try {
    config = kgrec::load_config(args.config_path, overrides);
  } catch (const kgrec::ConfigError& error) {
    for (const std::string& violation : error.violations()) {
      std::cerr << "config error: " << violation << '\n';
    }
    return 1;
  }

  try {
    kgrec::run_pipeline(config, last_stage, std::cout);
  } catch (const kgrec::StageError& error) {
    std::cerr << "stage failure " << error.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("kgrec ") + kgrec::kVersion +
               " - knowledge-graph feature recommender"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    kgrec::Stage stage;
  };
  const Entry entries[] = {
      {"run", "full pipeline: preprocess, extract, weigh, train, recommend, "
              "evaluate",
       kgrec::Stage::kEvaluate},
      {"extract", "stop after the feature catalog", kgrec::Stage::kExtract},
      {"weights", "stop after the per-user feature weights",
       kgrec::Stage::kWeights},
      {"train", "stop after model training", kgrec::Stage::kTrain},
      {"recommend", "stop after the recommendation lists",
       kgrec::Stage::kRecommend},
      {"evaluate", "full pipeline including the metric reports",
       kgrec::Stage::kEvaluate},
  };

  std::vector<SubcommandArgs> args(std::size(entries));
  std::vector<std::pair<CLI::App*, kgrec::Stage>> commands;
  for (std::size_t i = 0; i < std::size(entries); ++i) {
    CLI::App* cmd = app.add_subcommand(entries[i].name, entries[i].help);
    attach_options(cmd, args[i]);
    commands.emplace_back(cmd, entries[i].stage);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    // usage problems count as config errors; --help stays 0
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (commands[i].first->parsed()) {
      return run_stage(args[i], commands[i].second);
    }
  }
  return 1;
}
