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

#include "kgrec/graph.hpp"

#include <algorithm>
#include <set>

#include "kgrec/io.hpp"

namespace kgrec {

std::int32_t KnowledgeGraph::intern_entity(const std::string& name) {
  const auto it = entity_ids_.find(name);
  if (it != entity_ids_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(entities_.size());
  entities_.push_back(name);
  adjacency_.emplace_back();
  entity_ids_.emplace(name, id);
  return id;
}

std::int32_t KnowledgeGraph::intern_predicate(const std::string& name) {
  const auto it = predicate_ids_.find(name);
  if (it != predicate_ids_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(predicates_.size());
  predicates_.push_back(name);
  predicate_ids_.emplace(name, id);
  return id;
}

bool KnowledgeGraph::add_triple(const Triple& triple) {
  const auto subject = intern_entity(triple.subject);
  const auto predicate = intern_predicate(triple.predicate);
  const auto object = intern_entity(triple.object);
  auto& out_edges = adjacency_[subject];
  for (const Edge& edge : out_edges) {
    if (edge.predicate == predicate && edge.object == object) return false;
  }
  out_edges.push_back(Edge{predicate, object});
  ++triple_count_;
  return true;
}

void KnowledgeGraph::map_item(const std::string& item,
                              const std::string& entity) {
  item_entities_[item] = intern_entity(entity);
}

std::int32_t KnowledgeGraph::item_entity(const std::string& item) const {
  const auto it = item_entities_.find(item);
  return it == item_entities_.end() ? -1 : it->second;
}

FeatureId FeatureCatalog::intern(const Feature& feature) {
  const auto it = ids_.find(feature);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<FeatureId>(features_.size());
  features_.push_back(feature);
  ids_.emplace(feature, id);
  return id;
}

void FeatureCatalog::set_item_features(const std::string& item,
                                       std::vector<FeatureId> fids) {
  std::sort(fids.begin(), fids.end());
  fids.erase(std::unique(fids.begin(), fids.end()), fids.end());
  for (const FeatureId fid : fids) {
    feature_items_[fid].push_back(item);
  }
  items_[item] = std::move(fids);
}

FeatureId FeatureCatalog::id_of(const Feature& feature) const {
  const auto it = ids_.find(feature);
  return it == ids_.end() ? -1 : it->second;
}

const std::vector<FeatureId>& FeatureCatalog::features_of(
    const std::string& item) const {
  static const std::vector<FeatureId> kEmpty;
  const auto it = items_.find(item);
  return it == items_.end() ? kEmpty : it->second;
}

std::size_t FeatureCatalog::item_count_of(FeatureId id) const {
  const auto it = feature_items_.find(id);
  return it == feature_items_.end() ? 0 : it->second.size();
}

Blacklist default_blacklist() {
  return Blacklist{
      "dbo:wikiPageWikiLink", "owl:sameAs",
      "rdf:type",             "gold:hypernym",
      "rdfs:seeAlso",         "dbp:wordnet_type",
      "dbo:wikiPageExternalLink", "dbo:thumbnail",
      "prov:wasDerivedFrom",  "dbp:wikiPageUsesTemplate",
  };
}

KnowledgeGraph load_triples(std::istream& in) {
  KnowledgeGraph kg;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 3) {
      throw ParseError("expected 3 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_number);
    }
    for (const auto field : fields) {
      if (field.empty()) {
        throw ParseError("empty field in triple", line_number);
      }
    }
    kg.add_triple(Triple{std::string(fields[0]), std::string(fields[1]),
                         std::string(fields[2])});
  }
  if (kg.triple_count() == 0) {
    throw ParseError("no triples in input");
  }
  return kg;
}

void load_item_map(std::istream& in, KnowledgeGraph& kg) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected item-id<TAB>entity-id", line_number);
    }
    kg.map_item(std::string(fields[0]), std::string(fields[1]));
  }
}

Blacklist load_blacklist(std::istream& in) {
  Blacklist blacklist;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    blacklist.emplace(text);
  }
  return blacklist;
}

namespace {

void explore_from(const KnowledgeGraph& kg, std::int32_t entity,
                  int remaining_depth, const Blacklist& blacklist,
                  std::vector<std::int32_t>& chain,
                  std::vector<std::int32_t>& on_path,
                  std::set<Feature>& found) {
  for (const KnowledgeGraph::Edge& edge : kg.edges(entity)) {
    // The blacklist applies to the first hop only; pruning here also removes
    // every deeper chain that would start with the same predicate.
    if (chain.empty() &&
        blacklist.count(kg.predicate_name(edge.predicate)) > 0) {
      continue;
    }
    chain.push_back(edge.predicate);
    Feature feature;
    feature.chain.reserve(chain.size());
    for (const std::int32_t predicate : chain) {
      feature.chain.push_back(kg.predicate_name(predicate));
    }
    feature.object = kg.entity_name(edge.object);
    found.insert(std::move(feature));
    // An already-visited entity is a legitimate terminal but is not expanded
    // again, so each path visits an entity at most once.
    if (remaining_depth > 1 &&
        std::find(on_path.begin(), on_path.end(), edge.object) ==
            on_path.end()) {
      on_path.push_back(edge.object);
      explore_from(kg, edge.object, remaining_depth - 1, blacklist, chain,
                   on_path, found);
      on_path.pop_back();
    }
    chain.pop_back();
  }
}

}  // namespace

std::vector<Feature> explore(const KnowledgeGraph& kg, const std::string& item,
                             int depth, const Blacklist& blacklist) {
  if (depth < 1) {
    throw std::invalid_argument("exploration depth must be >= 1");
  }
  const std::int32_t entity = kg.item_entity(item);
  if (entity < 0) return {};
  std::set<Feature> found;
  std::vector<std::int32_t> chain;
  std::vector<std::int32_t> on_path{entity};
  explore_from(kg, entity, depth, blacklist, chain, on_path, found);
  return std::vector<Feature>(found.begin(), found.end());
}

FeatureCatalog build_catalog(const KnowledgeGraph& kg,
                             const std::vector<std::string>& items, int depth,
                             const Blacklist& blacklist) {
  if (items.empty()) {
    throw std::invalid_argument("catalog requires at least one item");
  }
  std::vector<std::string> ordered = items;
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  FeatureCatalog catalog;
  for (const std::string& item : ordered) {
    std::vector<FeatureId> fids;
    for (const Feature& feature : explore(kg, item, depth, blacklist)) {
      fids.push_back(catalog.intern(feature));
    }
    catalog.set_item_features(item, std::move(fids));
  }
  return catalog;
}

FeatureCatalog filter_by_frequency(const FeatureCatalog& catalog,
                                   std::size_t min_items) {
  if (min_items < 1) {
    throw std::invalid_argument("min_items must be >= 1");
  }
  FeatureCatalog filtered;
  // Re-interning in id order preserves every feature id.
  for (FeatureId id = 0;
       id < static_cast<FeatureId>(catalog.registered_count()); ++id) {
    filtered.intern(catalog.feature(id));
  }
  for (const auto& [item, fids] : catalog.item_features()) {
    std::vector<FeatureId> kept;
    for (const FeatureId fid : fids) {
      if (catalog.item_count_of(fid) >= min_items) kept.push_back(fid);
    }
    filtered.set_item_features(item, std::move(kept));
  }
  return filtered;
}

void write_catalog(const FeatureCatalog& catalog, std::ostream& out) {
  out << "# feature_id\tdepth\titem_count\tobject\tchain...\n";
  std::vector<FeatureId> active;
  active.reserve(catalog.feature_items().size());
  for (const auto& [fid, items] : catalog.feature_items()) {
    active.push_back(fid);
  }
  std::sort(active.begin(), active.end());
  for (const FeatureId fid : active) {
    const Feature& feature = catalog.feature(fid);
    out << fid << '\t' << feature.depth() << '\t'
        << catalog.item_count_of(fid) << '\t' << feature.object;
    for (const auto& predicate : feature.chain) {
      out << '\t' << predicate;
    }
    out << '\n';
  }
}

}  // namespace kgrec
