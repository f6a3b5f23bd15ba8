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

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "kgrec/model.hpp"

namespace kgrec {

// Ranked candidates for one user under the all-unrated-items protocol:
// scores non-increasing, ties resolved by ascending item id, never an item
// from the user's train set.
struct RecommendationList {
  std::string user;
  std::vector<std::pair<std::string, double>> entries;
};

RecommendationList recommend_top_k(
    const std::string& user, const Model& model,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train_log,
    std::size_t k);

// Every user of the train log, ascending; per-user scoring fans out over
// `threads` workers and the result does not depend on the thread count.
std::map<std::string, RecommendationList> recommend_all(
    const Model& model,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train_log,
    std::size_t k, int threads);

// TSV: user, item, score, 1-based rank.
void write_recommendations(
    const std::map<std::string, RecommendationList>& lists, std::ostream& out);

}  // namespace kgrec
