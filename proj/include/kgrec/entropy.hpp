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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgrec/dataset.hpp"
#include "kgrec/graph.hpp"

namespace kgrec {

// Balanced-by-construction labelled dataset for one user: the consumed items
// as positives, sampled non-consumed items as negatives. The negative side
// may fall short when the candidate pool is small.
struct UserEntropyDataset {
  std::string user;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;

  std::size_t size() const { return positives.size() + negatives.size(); }
};

// Per-user feature weights k_uf, frozen after computation, sorted by id.
struct UserFeatureWeights {
  std::string user;
  std::vector<std::pair<FeatureId, double>> weights;

  // -1 sentinel when the feature is not retained.
  double weight_of(FeatureId id) const;
  bool retains(FeatureId id) const { return weight_of(id) >= 0.0; }
};

struct WeightOptions {
  std::size_t per_hop_limit = 100;  // 0 = unlimited
  double ig_cutoff = 0.0;           // features must exceed this gain
  // Hop depths allowed to contribute; nullopt = every depth.
  std::optional<std::unordered_set<int>> hop_mask;
};

// B(q) = -(q log2 q + (1-q) log2 (1-q)), with 0 log 0 = 0.
double binary_entropy(double q);

// Entropy reduction obtained by observing the feature's presence over the
// dataset. The base entropy is taken from the realized positive fraction, so
// pool-shortfall datasets stay consistent.
double information_gain(const UserEntropyDataset& dataset,
                        const FeatureCatalog& catalog, FeatureId feature);

UserEntropyDataset make_entropy_dataset(const InteractionLog& log,
                                        const std::string& user,
                                        std::uint64_t seed);

// Gains for every feature of the user's positive items; keeps those above
// the cutoff, at most `per_hop_limit` per hop depth, ranked by gain with ties
// broken by ascending feature id.
UserFeatureWeights compute_user_weights(const UserEntropyDataset& dataset,
                                        const FeatureCatalog& catalog,
                                        const WeightOptions& options);

// Weights for every user of the log; per-user work is independent and is
// spread over `threads` workers.
std::map<std::string, UserFeatureWeights> compute_all_weights(
    const InteractionLog& log, const FeatureCatalog& catalog,
    const WeightOptions& options, std::uint64_t negative_seed, int threads);

// TSV dump: user, feature-id, k_uf.
void write_weights(const std::map<std::string, UserFeatureWeights>& weights,
                   std::ostream& out);
std::map<std::string, UserFeatureWeights> read_weights(std::istream& in);

}  // namespace kgrec
