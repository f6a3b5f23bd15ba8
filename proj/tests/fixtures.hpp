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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kgrec/dataset.hpp"
#include "kgrec/entropy.hpp"
#include "kgrec/graph.hpp"

namespace kgrec::testing {

inline std::filesystem::path data_dir() {
  return std::filesystem::path(KGREC_DATA_DIR);
}

inline std::filesystem::path poi_dir() { return data_dir() / "poi"; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// The bundled points-of-interest graph: five items, two predicates.
inline KnowledgeGraph poi_graph() {
  std::ifstream triples(poi_dir() / "triples.tsv");
  KnowledgeGraph kg = load_triples(triples);
  std::ifstream mapping(poi_dir() / "mapping.tsv");
  load_item_map(mapping, kg);
  return kg;
}

inline std::vector<std::string> poi_items() {
  return {"Capitoline Museums", "Central Park", "Piazza Navona",
          "Rijksmuseum", "Vondelpark"};
}

inline InteractionLog poi_log() {
  InteractionLog log;
  log.add("pink", "Rijksmuseum");
  log.add("pink", "Vondelpark");
  log.add("green", "Rijksmuseum");
  log.add("green", "Capitoline Museums");
  log.add("blue", "Piazza Navona");
  log.add("blue", "Central Park");
  return log;
}

inline FeatureCatalog poi_catalog() {
  const KnowledgeGraph kg = poi_graph();
  return build_catalog(kg, poi_items(), 1, {});
}

inline Feature make_feature(std::vector<std::string> chain,
                            std::string object) {
  Feature feature;
  feature.chain = std::move(chain);
  feature.object = std::move(object);
  return feature;
}

// The balanced dataset used throughout the pink examples: her two items
// against the two items nobody she overlaps with has visited.
inline UserEntropyDataset pink_dataset() {
  UserEntropyDataset dataset;
  dataset.user = "pink";
  dataset.positives = {"Rijksmuseum", "Vondelpark"};
  dataset.negatives = {"Central Park", "Piazza Navona"};
  return dataset;
}

// Synthetic separable instance: 40 items in 10 genres of 4 items, genres
// paired into 5 families (a 2-hop feature). Each of the 20 users consumes
// the 8 items of one family, so both hop depths carry a clean signal.
struct SyntheticInstance {
  KnowledgeGraph kg;
  InteractionLog log;
  std::vector<std::string> items;
};

inline SyntheticInstance synthetic_instance() {
  SyntheticInstance instance;
  const auto item_name = [](int j) {
    return "i" + std::string(j < 10 ? "0" : "") + std::to_string(j);
  };
  for (int j = 0; j < 40; ++j) {
    const int genre = j / 4;
    instance.kg.add_triple(
        Triple{item_name(j), "genre", "g" + std::to_string(genre)});
    instance.items.push_back(item_name(j));
  }
  for (int genre = 0; genre < 10; ++genre) {
    instance.kg.add_triple(Triple{"g" + std::to_string(genre), "family",
                                  "h" + std::to_string(genre / 2)});
  }
  for (const auto& item : instance.items) {
    instance.kg.map_item(item, item);
  }
  for (int u = 0; u < 20; ++u) {
    const std::string user =
        "u" + std::string(u < 10 ? "0" : "") + std::to_string(u);
    const int family = u % 5;
    for (int j = 8 * family; j < 8 * family + 8; ++j) {
      instance.log.add(user, item_name(j));
    }
  }
  return instance;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() /
      ("kgrec_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace kgrec::testing
