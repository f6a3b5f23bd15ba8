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

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "kgrec/dataset.hpp"
#include "kgrec/entropy.hpp"
#include "kgrec/recommend.hpp"

namespace kgrec {

using RecommendationLists = std::map<std::string, RecommendationList>;

// Catalog split into the most-popular items jointly holding at least `ratio`
// of the train interactions (short head) and the rest (long tail).
struct PopularityPartition {
  std::set<std::string> short_head;
  std::set<std::string> long_tail;
};

struct EvalReport {
  std::size_t cutoff = 0;
  double ndcg = 0.0;
  double hit_ratio = 0.0;
  std::size_t item_coverage = 0;
  double gini_diversity = 0.0;    // 1 - Gini coefficient, higher is better
  double gini_coefficient = 0.0;  // raw coefficient, for transparency
  double shannon_entropy = 0.0;
  double aclt = 0.0;
  double pop_rsp = 0.0;
  double pop_reo = 0.0;
  std::map<std::string, double> ndcg_per_user;
  std::map<std::string, double> hit_per_user;
  std::map<std::string, double> aclt_per_user;
};

// Mean binary-relevance nDCG over users with a non-empty test set.
double ndcg_at_k(const RecommendationLists& lists, const InteractionLog& test,
                 std::size_t k,
                 std::map<std::string, double>* per_user = nullptr);

// Fraction of evaluated users whose first k entries hit any test item.
double hit_ratio_at_k(const RecommendationLists& lists,
                      const InteractionLog& test, std::size_t k,
                      std::map<std::string, double>* per_user = nullptr);

// Number of distinct items recommended across all lists.
std::size_t item_coverage_at_k(const RecommendationLists& lists,
                               std::size_t k);

// 1 - Gini coefficient of the exposure distribution over a catalog of
// `catalog_size` items (unrecommended items count as zero exposure).
double gini_diversity_at_k(const RecommendationLists& lists, std::size_t k,
                           std::size_t catalog_size,
                           double* raw_coefficient = nullptr);

// Entropy in bits of the recommendation frequency distribution.
double shannon_entropy_at_k(const RecommendationLists& lists, std::size_t k);

PopularityPartition popularity_partition(const InteractionLog& train,
                                         double ratio);

// Mean number of long-tail items per user list.
double aclt_at_k(const RecommendationLists& lists,
                 const PopularityPartition& partition, std::size_t k,
                 std::map<std::string, double>* per_user = nullptr);

// Ranking statistical parity across the popularity partition:
// |P_head - P_tail| / (P_head + P_tail), with P_g the group's recommendation
// rate over its per-user unrated pool. 0/0 counts as 0.
double pop_rsp_at_k(const RecommendationLists& lists,
                    const PopularityPartition& partition,
                    const InteractionLog& train, std::size_t k);

// Equal-opportunity analogue over test hits per group.
double pop_reo_at_k(const RecommendationLists& lists,
                    const PopularityPartition& partition,
                    const InteractionLog& test, std::size_t k);

EvalReport evaluate_at(const RecommendationLists& lists, const Split& split,
                       const PopularityPartition& partition, std::size_t k);

// How much of each user's most informative feature set reappears in the
// features of her recommended items, plus feature-gain aggregates computed
// on the original interactions and recomputed on the recommendation lists.
struct SemanticsReport {
  std::vector<std::size_t> k_values;  // 0 = no limit
  // user -> k -> percentage in [0, 100]; users with no weights are skipped.
  std::map<std::string, std::map<std::size_t, double>> per_user;
  // k -> {Q1, Q2, Q3} of the per-user percentages.
  std::map<std::size_t, std::array<double, 3>> quartiles;
  std::map<FeatureId, double> dataset_feature_gain;
  std::map<FeatureId, double> list_feature_gain;
};

SemanticsReport semantics_report(
    const RecommendationLists& lists,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train,
    const std::vector<std::size_t>& k_values, std::uint64_t seed);

// Linear-interpolation quantile of a sample; q in [0, 1].
double quantile(std::vector<double> values, double q);

// One `metric@cutoff = value` record per line.
void write_metrics_report(const std::vector<EvalReport>& reports,
                          std::ostream& out);
void write_per_user_metrics(const std::vector<EvalReport>& reports,
                            std::ostream& out);
void write_semantics_report(const SemanticsReport& report, std::ostream& out);

}  // namespace kgrec
