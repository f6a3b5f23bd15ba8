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

#include "kgrec/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "kgrec/dataset.hpp"
#include "kgrec/entropy.hpp"
#include "kgrec/graph.hpp"
#include "kgrec/io.hpp"
#include "kgrec/metrics.hpp"
#include "kgrec/model.hpp"
#include "kgrec/recommend.hpp"
#include "kgrec/version.hpp"

namespace kgrec {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string joined;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) joined += sep;
    joined += parts[i];
  }
  return joined;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(start, comma - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty()) parts.emplace_back(part);
    start = comma + 1;
  }
  return parts;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations, "; ")),
      violations_(std::move(violations)) {}

namespace {

// Collects raw key/value assignments; later assignments win.
std::map<std::string, std::string> parse_flat_document(
    const std::string& text, std::vector<std::string>& errors) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view stripped = trim(strip_cr(line));
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_number) +
                       ": expected key = value");
      continue;
    }
    const std::string key(trim(stripped.substr(0, eq)));
    const std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line_number) + ": empty key");
      continue;
    }
    values[key] = value;
  }
  return values;
}

class FieldReader {
 public:
  FieldReader(std::map<std::string, std::string> values,
              std::vector<std::string>& errors)
      : values_(std::move(values)), errors_(errors) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return values_.count(key) > 0;
  }

  std::string raw(const std::string& key) {
    seen_.insert(key);
    return values_.at(key);
  }

  void read_double(const std::string& key, double& out, double lo, double hi,
                   bool lo_open = false, bool hi_open = false) {
    if (!has(key)) return;
    try {
      const double value = parse_double(raw(key));
      const bool above = lo_open ? value > lo : value >= lo;
      const bool below = hi_open ? value < hi : value <= hi;
      if (!above || !below) {
        errors_.push_back(key + ": value " + format_double(value) +
                          " out of range " + (lo_open ? "(" : "[") +
                          format_double(lo) + ", " + format_double(hi) +
                          (hi_open ? ")" : "]"));
        return;
      }
      out = value;
    } catch (const ParseError&) {
      errors_.push_back(key + ": not a number: '" + raw(key) + "'");
    }
  }

  template <typename T>
  void read_int(const std::string& key, T& out, long long lo, long long hi) {
    if (!has(key)) return;
    try {
      const long long value = parse_int(raw(key));
      if (value < lo || value > hi) {
        errors_.push_back(key + ": value " + std::to_string(value) +
                          " out of range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
        return;
      }
      out = static_cast<T>(value);
    } catch (const ParseError&) {
      errors_.push_back(key + ": not an integer: '" + raw(key) + "'");
    }
  }

  void read_seed(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    try {
      std::uint64_t value = 0;
      const std::string& text = raw(key);
      const auto result =
          std::from_chars(text.data(), text.data() + text.size(), value);
      if (result.ec != std::errc() ||
          result.ptr != text.data() + text.size()) {
        throw ParseError("bad seed");
      }
      out = value;
    } catch (const ParseError&) {
      errors_.push_back(key + ": not an unsigned integer: '" + raw(key) +
                        "'");
    }
  }

  void complain_about_unknown_keys() {
    for (const auto& [key, value] : values_) {
      if (seen_.count(key) == 0) {
        errors_.push_back("unknown key: " + key);
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> seen_;
  std::vector<std::string>& errors_;
};

fs::path resolve(const fs::path& base_dir, const std::string& value) {
  const fs::path path(value);
  return path.is_absolute() ? path : base_dir / path;
}

}  // namespace

PipelineConfig validate_config(
    const std::string& text, const fs::path& base_dir,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::string> errors;
  auto values = parse_flat_document(text, errors);
  for (const auto& [key, value] : overrides) {
    values[key] = value;
  }

  PipelineConfig config;
  FieldReader fields(std::move(values), errors);

  const auto read_path = [&](const std::string& key, fs::path& out,
                             bool required) {
    if (!fields.has(key)) {
      if (required) errors.push_back(key + ": required key is missing");
      return false;
    }
    out = resolve(base_dir, fields.raw(key));
    return true;
  };

  const auto check_readable = [&](const std::string& key,
                                  const fs::path& path) {
    if (!fs::exists(path)) {
      errors.push_back(key + ": file not found: " + path.string());
    }
  };

  if (read_path("ratings_path", config.ratings_path, true)) {
    check_readable("ratings_path", config.ratings_path);
  }
  if (read_path("triples_path", config.triples_path, true)) {
    check_readable("triples_path", config.triples_path);
  }
  if (read_path("mapping_path", config.mapping_path, true)) {
    check_readable("mapping_path", config.mapping_path);
  }
  read_path("output_dir", config.output_dir, true);
  {
    fs::path blacklist_file;
    if (read_path("blacklist_path", blacklist_file, false)) {
      check_readable("blacklist_path", blacklist_file);
      config.blacklist_path = blacklist_file;
    }
  }
  if (fields.has("blacklist")) {
    const std::string value = fields.raw("blacklist");
    config.blacklist = value == "none" ? std::vector<std::string>{}
                                       : split_list(value);
  }

  fields.read_double("rating_threshold", config.rating_threshold, -1e18, 1e18);
  fields.read_int("core", config.core, 1, 1'000'000'000);
  fields.read_double("split_ratio", config.split_ratio, 0.0, 1.0, true, true);
  fields.read_seed("seed", config.seed);
  fields.read_int("threads", config.threads, 1, 4096);
  fields.read_int("depth", config.depth, 1, 16);
  fields.read_int("min_items", config.min_items, 1, 1'000'000'000);
  fields.read_int("per_hop_limit", config.per_hop_limit, 0, 1'000'000'000);
  fields.read_double("ig_cutoff", config.ig_cutoff, 0.0, 1.0, false, true);
  if (fields.has("hops")) {
    const std::string value = fields.raw("hops");
    if (value == "all") {
      config.hops.reset();
    } else if (value == "none") {
      config.hops = std::vector<int>{};
    } else {
      std::vector<int> hops;
      for (const auto& part : split_list(value)) {
        try {
          const long long hop = parse_int(part);
          if (hop < 1 || hop > config.depth) {
            errors.push_back("hops: hop " + std::to_string(hop) +
                             " outside [1, depth=" +
                             std::to_string(config.depth) + "]");
            continue;
          }
          hops.push_back(static_cast<int>(hop));
        } catch (const ParseError&) {
          errors.push_back("hops: not an integer: '" + part + "'");
        }
      }
      config.hops = std::move(hops);
    }
  }
  fields.read_int("dim", config.dim, 1, 1'000'000);
  fields.read_double("learning_rate", config.learning_rate, 0.0, 1e9, true);
  fields.read_int("epochs", config.epochs, 0, 1'000'000);
  fields.read_double("l2", config.l2, 0.0, 1e9);
  fields.read_double("init_scale", config.init_scale, 0.0, 1e9);
  fields.read_int("top_k", config.top_k, 1, 1'000'000'000);
  if (fields.has("cutoffs")) {
    std::vector<std::size_t> cutoffs;
    for (const auto& part : split_list(fields.raw("cutoffs"))) {
      try {
        const long long cutoff = parse_int(part);
        if (cutoff < 1) {
          errors.push_back("cutoffs: cutoff must be >= 1, got " +
                           std::to_string(cutoff));
          continue;
        }
        cutoffs.push_back(static_cast<std::size_t>(cutoff));
      } catch (const ParseError&) {
        errors.push_back("cutoffs: not an integer: '" + part + "'");
      }
    }
    if (!cutoffs.empty()) config.cutoffs = std::move(cutoffs);
  }
  fields.read_double("popularity_ratio", config.popularity_ratio, 0.0, 1.0);
  if (fields.has("semantics_ks")) {
    std::vector<std::size_t> ks;
    for (const auto& part : split_list(fields.raw("semantics_ks"))) {
      try {
        const long long k = parse_int(part);
        if (k < 0) {
          errors.push_back("semantics_ks: must be >= 0, got " +
                           std::to_string(k));
          continue;
        }
        ks.push_back(static_cast<std::size_t>(k));
      } catch (const ParseError&) {
        errors.push_back("semantics_ks: not an integer: '" + part + "'");
      }
    }
    config.semantics_ks = std::move(ks);
  }

  for (const std::size_t cutoff : config.cutoffs) {
    if (cutoff > config.top_k) {
      errors.push_back("cutoffs: cutoff " + std::to_string(cutoff) +
                       " exceeds top_k = " + std::to_string(config.top_k));
    }
  }

  fields.complain_about_unknown_keys();
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

PipelineConfig load_config(
    const fs::path& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(config_path);
  if (!in) {
    throw ConfigError({"cannot open config file: " + config_path.string()});
  }
  std::ostringstream text;
  text << in.rdbuf();
  return validate_config(text.str(), config_path.parent_path(), overrides);
}

namespace {

struct StageSeeds {
  std::uint64_t split;
  std::uint64_t negatives;
  std::uint64_t model;
  std::uint64_t semantics;
};

StageSeeds derive_stage_seeds(std::uint64_t master) {
  return StageSeeds{
      derive_seed(master, "split"),
      derive_seed(master, "negatives"),
      derive_seed(master, "model"),
      derive_seed(master, "semantics"),
  };
}

// Writes through a .partial file and renames once the writer finished, so an
// aborted stage is recognizable on disk.
void write_artifact(const fs::path& path,
                    const std::function<void(std::ostream&)>& writer,
                    std::vector<fs::path>& artifacts) {
  const fs::path partial = path.string() + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + partial.string());
    }
    writer(out);
    if (!out) {
      throw std::runtime_error("write failed: " + partial.string());
    }
  }
  fs::rename(partial, path);
  artifacts.push_back(path);
}

Blacklist resolve_blacklist(const PipelineConfig& config) {
  if (config.blacklist) {
    return Blacklist(config.blacklist->begin(), config.blacklist->end());
  }
  if (config.blacklist_path) {
    std::ifstream in(*config.blacklist_path);
    if (!in) {
      throw std::runtime_error("cannot open blacklist: " +
                               config.blacklist_path->string());
    }
    return load_blacklist(in);
  }
  return default_blacklist();
}

WeightOptions resolve_weight_options(const PipelineConfig& config) {
  WeightOptions options;
  options.per_hop_limit = config.per_hop_limit;
  options.ig_cutoff = config.ig_cutoff;
  if (config.hops) {
    options.hop_mask.emplace(config.hops->begin(), config.hops->end());
  }
  return options;
}

void write_manifest(const PipelineConfig& config, const StageSeeds& seeds,
                    const std::vector<fs::path>& artifacts,
                    const Blacklist& blacklist, std::ostream& out) {
  out << "# run manifest, loadable as a config file (version " << kVersion
      << ")\n";
  out << "ratings_path = " << fs::absolute(config.ratings_path).string()
      << '\n';
  out << "triples_path = " << fs::absolute(config.triples_path).string()
      << '\n';
  out << "mapping_path = " << fs::absolute(config.mapping_path).string()
      << '\n';
  out << "output_dir = " << fs::absolute(config.output_dir).string() << '\n';
  {
    std::vector<std::string> predicates(blacklist.begin(), blacklist.end());
    std::sort(predicates.begin(), predicates.end());
    out << "blacklist = "
        << (predicates.empty() ? "none" : join(predicates, ",")) << '\n';
  }
  out << "rating_threshold = " << format_double(config.rating_threshold)
      << '\n';
  out << "core = " << config.core << '\n';
  out << "split_ratio = " << format_double(config.split_ratio) << '\n';
  out << "seed = " << config.seed << '\n';
  out << "threads = " << config.threads << '\n';
  out << "depth = " << config.depth << '\n';
  out << "min_items = " << config.min_items << '\n';
  out << "per_hop_limit = " << config.per_hop_limit << '\n';
  out << "ig_cutoff = " << format_double(config.ig_cutoff) << '\n';
  if (config.hops) {
    std::vector<std::string> hops;
    for (const int hop : *config.hops) hops.push_back(std::to_string(hop));
    out << "hops = " << (hops.empty() ? "none" : join(hops, ",")) << '\n';
  } else {
    out << "hops = all\n";
  }
  out << "dim = " << config.dim << '\n';
  out << "learning_rate = " << format_double(config.learning_rate) << '\n';
  out << "epochs = " << config.epochs << '\n';
  out << "l2 = " << format_double(config.l2) << '\n';
  out << "init_scale = " << format_double(config.init_scale) << '\n';
  out << "top_k = " << config.top_k << '\n';
  {
    std::vector<std::string> cutoffs;
    for (const std::size_t cutoff : config.cutoffs) {
      cutoffs.push_back(std::to_string(cutoff));
    }
    out << "cutoffs = " << join(cutoffs, ",") << '\n';
  }
  out << "popularity_ratio = " << format_double(config.popularity_ratio)
      << '\n';
  {
    std::vector<std::string> ks;
    for (const std::size_t k : config.semantics_ks) {
      ks.push_back(std::to_string(k));
    }
    out << "semantics_ks = " << join(ks, ",") << '\n';
  }
  out << "# derived stage seeds:\n";
  out << "#   split = " << seeds.split << '\n';
  out << "#   negatives = " << seeds.negatives << '\n';
  out << "#   model = " << seeds.model << '\n';
  out << "#   semantics = " << seeds.semantics << '\n';
  out << "# artifacts:\n";
  for (const auto& artifact : artifacts) {
    out << "#   " << artifact.string() << '\n';
  }
}

template <typename Fn>
auto guarded(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, Stage last_stage,
                       std::ostream& log) {
  RunResult result;
  const StageSeeds seeds = derive_stage_seeds(config.seed);
  fs::create_directories(config.output_dir);
  Blacklist blacklist;

  const auto finish = [&]() -> RunResult& {
    write_artifact(
        config.output_dir / "manifest.cfg",
        [&](std::ostream& out) {
          write_manifest(config, seeds, result.artifacts, blacklist, out);
        },
        result.artifacts);
    return result;
  };

  // ingest + preprocess
  InteractionLog pruned;
  Split split;
  guarded("preprocess", [&] {
    std::ifstream ratings(config.ratings_path);
    if (!ratings) {
      throw std::runtime_error("cannot open " + config.ratings_path.string());
    }
    const InteractionLog raw = load_ratings(ratings, config.rating_threshold);
    log << "[preprocess] loaded " << raw.interaction_count()
        << " interactions, " << raw.users().size() << " users, "
        << raw.items().size() << " items\n";
    pruned = k_core(raw, config.core);
    log << "[preprocess] " << config.core << "-core kept "
        << pruned.interaction_count() << " interactions, "
        << pruned.users().size() << " users, " << pruned.items().size()
        << " items\n";
    if (pruned.interaction_count() == 0) {
      throw std::runtime_error("k-core preprocessing removed every user");
    }
    split = holdout_split(pruned, config.split_ratio, seeds.split);
    write_artifact(
        config.output_dir / "train.tsv",
        [&](std::ostream& out) { write_interactions(split.train, out); },
        result.artifacts);
    write_artifact(
        config.output_dir / "test.tsv",
        [&](std::ostream& out) { write_interactions(split.test, out); },
        result.artifacts);
  });

  // extract
  FeatureCatalog catalog;
  guarded("extract", [&] {
    std::ifstream triples(config.triples_path);
    if (!triples) {
      throw std::runtime_error("cannot open " + config.triples_path.string());
    }
    KnowledgeGraph kg = load_triples(triples);
    std::ifstream mapping(config.mapping_path);
    if (!mapping) {
      throw std::runtime_error("cannot open " + config.mapping_path.string());
    }
    load_item_map(mapping, kg);
    log << "[extract] graph: " << kg.triple_count() << " triples, "
        << kg.entity_count() << " entities, " << kg.predicate_count()
        << " predicates, " << kg.mapped_item_count() << " mapped items\n";
    blacklist = resolve_blacklist(config);
    const FeatureCatalog full =
        build_catalog(kg, pruned.items(), config.depth, blacklist);
    catalog = filter_by_frequency(full, config.min_items);
    log << "[extract] " << full.active_count() << " features, "
        << catalog.active_count() << " after the min_items="
        << config.min_items << " filter\n";
    write_artifact(
        config.output_dir / "catalog.tsv",
        [&](std::ostream& out) { write_catalog(catalog, out); },
        result.artifacts);
  });
  if (last_stage == Stage::kExtract) return finish();

  // weights
  std::map<std::string, UserFeatureWeights> weights;
  guarded("weights", [&] {
    const WeightOptions options = resolve_weight_options(config);
    weights = compute_all_weights(split.train, catalog, options,
                                  seeds.negatives, config.threads);
    std::size_t retained = 0;
    std::size_t shortfall_users = 0;
    for (const auto& [user, entry] : weights) {
      retained += entry.weights.size();
      const auto dataset =
          make_entropy_dataset(split.train, user, seeds.negatives);
      if (dataset.negatives.size() < dataset.positives.size()) {
        ++shortfall_users;
      }
    }
    log << "[weights] retained " << retained << " user-feature weights";
    if (shortfall_users > 0) {
      log << " (negative pool fell short for " << shortfall_users
          << " users)";
    }
    log << "\n";
    write_artifact(
        config.output_dir / "weights.tsv",
        [&](std::ostream& out) { write_weights(weights, out); },
        result.artifacts);
  });
  if (last_stage == Stage::kWeights) return finish();

  // train
  Model model;
  guarded("train", [&] {
    TrainConfig train_config;
    train_config.dim = config.dim;
    train_config.learning_rate = config.learning_rate;
    train_config.epochs = config.epochs;
    train_config.l2 = config.l2;
    train_config.seed = seeds.model;
    train_config.init_scale = config.init_scale;
    train_config.threads = config.threads;
    model = init_model(catalog, weights, train_config);
    result.epoch_losses =
        train(split.train, catalog, weights, model, train_config);
    for (std::size_t epoch = 0; epoch < result.epoch_losses.size(); ++epoch) {
      log << "[train] epoch " << (epoch + 1) << " mean loss "
          << format_double(result.epoch_losses[epoch]) << '\n';
    }
    write_artifact(
        config.output_dir / "model.tsv",
        [&](std::ostream& out) { save_model(model, weights, out); },
        result.artifacts);
  });
  if (last_stage == Stage::kTrain) return finish();

  // recommend
  RecommendationLists lists;
  guarded("recommend", [&] {
    lists = recommend_all(model, weights, catalog, split.train, config.top_k,
                          config.threads);
    write_artifact(
        config.output_dir / "recommendations.tsv",
        [&](std::ostream& out) { write_recommendations(lists, out); },
        result.artifacts);
  });
  if (last_stage != Stage::kRecommend) {
    // evaluate
    guarded("evaluate", [&] {
      const PopularityPartition partition =
          popularity_partition(split.train, config.popularity_ratio);
      std::vector<EvalReport> reports;
      for (const std::size_t cutoff : config.cutoffs) {
        reports.push_back(evaluate_at(lists, split, partition, cutoff));
      }
      for (const auto& report : reports) {
        log << "[evaluate] ndcg@" << report.cutoff << " = "
            << format_double(report.ndcg) << ", coverage@" << report.cutoff
            << " = " << report.item_coverage << '\n';
      }
      write_artifact(
          config.output_dir / "metrics.txt",
          [&](std::ostream& out) { write_metrics_report(reports, out); },
          result.artifacts);
      write_artifact(
          config.output_dir / "per_user_metrics.tsv",
          [&](std::ostream& out) { write_per_user_metrics(reports, out); },
          result.artifacts);
      const SemanticsReport semantics =
          semantics_report(lists, weights, catalog, split.train,
                           config.semantics_ks, seeds.semantics);
      write_artifact(
          config.output_dir / "semantics.tsv",
          [&](std::ostream& out) { write_semantics_report(semantics, out); },
          result.artifacts);
    });
  }

  return finish();
}

}  // namespace kgrec
