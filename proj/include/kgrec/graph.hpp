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
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgrec/rng.hpp"

namespace kgrec {

using FeatureId = std::int32_t;

// A multi-hop predicate chain plus its terminal object. Identity is the
// chain and the terminal only; intermediate entities along the path do not
// distinguish features.
struct Feature {
  std::vector<std::string> chain;
  std::string object;

  int depth() const { return static_cast<int>(chain.size()); }

  friend bool operator==(const Feature& a, const Feature& b) {
    return a.chain == b.chain && a.object == b.object;
  }
  friend bool operator<(const Feature& a, const Feature& b) {
    if (a.chain != b.chain) return a.chain < b.chain;
    return a.object < b.object;
  }
};

struct FeatureHash {
  std::size_t operator()(const Feature& f) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& predicate : f.chain) {
      h = splitmix64(h ^ fnv1a64(predicate));
    }
    return static_cast<std::size_t>(splitmix64(h ^ fnv1a64(f.object)));
  }
};

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
};

// Directed multigraph over interned entities, plus the catalog-item to
// entity mapping. Immutable once loaded.
class KnowledgeGraph {
 public:
  struct Edge {
    std::int32_t predicate;
    std::int32_t object;
  };

  std::int32_t intern_entity(const std::string& name);
  std::int32_t intern_predicate(const std::string& name);
  // Returns false when the triple was already present.
  bool add_triple(const Triple& triple);
  void map_item(const std::string& item, const std::string& entity);

  std::size_t triple_count() const { return triple_count_; }
  std::size_t entity_count() const { return entities_.size(); }
  std::size_t predicate_count() const { return predicates_.size(); }
  std::size_t mapped_item_count() const { return item_entities_.size(); }

  const std::string& entity_name(std::int32_t id) const {
    return entities_[id];
  }
  const std::string& predicate_name(std::int32_t id) const {
    return predicates_[id];
  }
  // -1 when the item has no mapping.
  std::int32_t item_entity(const std::string& item) const;
  const std::vector<Edge>& edges(std::int32_t entity) const {
    return adjacency_[entity];
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> predicates_;
  std::unordered_map<std::string, std::int32_t> entity_ids_;
  std::unordered_map<std::string, std::int32_t> predicate_ids_;
  std::vector<std::vector<Edge>> adjacency_;
  std::unordered_map<std::string, std::int32_t> item_entities_;
  std::size_t triple_count_ = 0;
};

// Feature registry plus the item/feature incidence in both directions.
// `item_features` and `feature_items` are exact inverses; the feature set of
// the system is the key set of `feature_items`.
class FeatureCatalog {
 public:
  FeatureId intern(const Feature& feature);
  void set_item_features(const std::string& item, std::vector<FeatureId> fids);

  const Feature& feature(FeatureId id) const { return features_[id]; }
  // -1 when unknown.
  FeatureId id_of(const Feature& feature) const;
  std::size_t registered_count() const { return features_.size(); }
  std::size_t active_count() const { return feature_items_.size(); }

  const std::map<std::string, std::vector<FeatureId>>& item_features() const {
    return items_;
  }
  const std::unordered_map<FeatureId, std::vector<std::string>>&
  feature_items() const {
    return feature_items_;
  }
  // Empty for unknown or unmapped items.
  const std::vector<FeatureId>& features_of(const std::string& item) const;
  std::size_t item_count_of(FeatureId id) const;

 private:
  std::vector<Feature> features_;
  std::unordered_map<Feature, FeatureId, FeatureHash> ids_;
  std::map<std::string, std::vector<FeatureId>> items_;
  std::unordered_map<FeatureId, std::vector<std::string>> feature_items_;
};

using Blacklist = std::unordered_set<std::string>;

// The ten auxiliary DBpedia predicates dropped by default; overridable.
Blacklist default_blacklist();

// Reads subject/predicate/object TSV. `#` lines and blank lines are skipped,
// duplicates collapse. Throws ParseError on malformed lines or empty input.
KnowledgeGraph load_triples(std::istream& in);

// Reads item-id/entity-id TSV into an existing graph; a later mapping for the
// same item wins.
void load_item_map(std::istream& in, KnowledgeGraph& kg);

// Newline-separated predicate names; `#` lines and blanks skipped.
Blacklist load_blacklist(std::istream& in);

// All chain/terminal pairs reachable from the item's entity with chains of
// length 1..depth whose first predicate is not blacklisted. Unmapped items
// yield the empty set. Sorted, duplicate-free.
std::vector<Feature> explore(const KnowledgeGraph& kg, const std::string& item,
                             int depth, const Blacklist& blacklist);

// Explores every item (ascending item-id) and registers features in first-
// encountered order, so id assignment is deterministic.
FeatureCatalog build_catalog(const KnowledgeGraph& kg,
                             const std::vector<std::string>& items, int depth,
                             const Blacklist& blacklist);

// Drops features carried by fewer than `min_items` items, keeping both
// incidence directions consistent. Registered ids are preserved.
FeatureCatalog filter_by_frequency(const FeatureCatalog& catalog,
                                   std::size_t min_items);

// TSV dump: feature-id, depth, item count, terminal object, chain predicates.
void write_catalog(const FeatureCatalog& catalog, std::ostream& out);

}  // namespace kgrec
