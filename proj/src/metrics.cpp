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

#include "kgrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kgrec/io.hpp"

namespace kgrec {

namespace {

std::size_t effective_length(const RecommendationList& list, std::size_t k) {
  return std::min(k, list.entries.size());
}

std::map<std::string, std::size_t> exposure_counts(
    const RecommendationLists& lists, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [user, list] : lists) {
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n; ++r) {
      ++counts[list.entries[r].first];
    }
  }
  return counts;
}

double ratio_spread(double a, double b) {
  const double sum = a + b;
  if (sum == 0.0) return 0.0;
  return std::abs(a - b) / sum;
}

}  // namespace

double ndcg_at_k(const RecommendationLists& lists, const InteractionLog& test,
                 std::size_t k, std::map<std::string, double>* per_user) {
  if (k < 1) throw std::invalid_argument("cutoff must be >= 1");
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (const auto& [user, list] : lists) {
    const auto& relevant = test.items_of(user);
    if (relevant.empty()) continue;
    double dcg = 0.0;
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n; ++r) {
      if (std::binary_search(relevant.begin(), relevant.end(),
                             list.entries[r].first)) {
        dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    double idcg = 0.0;
    const std::size_t ideal_hits = std::min(k, relevant.size());
    for (std::size_t r = 0; r < ideal_hits; ++r) {
      idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    const double value = idcg > 0.0 ? dcg / idcg : 0.0;
    if (per_user != nullptr) (*per_user)[user] = value;
    sum += value;
    ++evaluated;
  }
  return evaluated == 0 ? 0.0 : sum / static_cast<double>(evaluated);
}

double hit_ratio_at_k(const RecommendationLists& lists,
                      const InteractionLog& test, std::size_t k,
                      std::map<std::string, double>* per_user) {
  std::size_t hits = 0;
  std::size_t evaluated = 0;
  for (const auto& [user, list] : lists) {
    const auto& relevant = test.items_of(user);
    if (relevant.empty()) continue;
    bool hit = false;
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n && !hit; ++r) {
      hit = std::binary_search(relevant.begin(), relevant.end(),
                               list.entries[r].first);
    }
    if (per_user != nullptr) (*per_user)[user] = hit ? 1.0 : 0.0;
    if (hit) ++hits;
    ++evaluated;
  }
  return evaluated == 0
             ? 0.0
             : static_cast<double>(hits) / static_cast<double>(evaluated);
}

std::size_t item_coverage_at_k(const RecommendationLists& lists,
                               std::size_t k) {
  return exposure_counts(lists, k).size();
}

double gini_diversity_at_k(const RecommendationLists& lists, std::size_t k,
                           std::size_t catalog_size, double* raw_coefficient) {
  const auto counts = exposure_counts(lists, k);
  if (counts.size() > catalog_size) {
    throw std::invalid_argument(
        "more distinct recommended items than the catalog size");
  }
  std::size_t total = 0;
  for (const auto& [item, count] : counts) total += count;
  if (raw_coefficient != nullptr) *raw_coefficient = 0.0;
  if (catalog_size < 2 || total == 0) return 1.0;

  // Exposure shares over the whole catalog, unrecommended items at zero,
  // sorted ascending.
  std::vector<double> shares(catalog_size, 0.0);
  std::size_t slot = catalog_size - counts.size();
  for (const auto& [item, count] : counts) {
    shares[slot++] = static_cast<double>(count) / static_cast<double>(total);
  }
  std::sort(shares.begin(), shares.end());

  const double n = static_cast<double>(catalog_size);
  double coefficient = 0.0;
  for (std::size_t j = 0; j < catalog_size; ++j) {
    coefficient += (2.0 * (static_cast<double>(j) + 1.0) - n - 1.0) *
                   shares[j] / (n - 1.0);
  }
  if (raw_coefficient != nullptr) *raw_coefficient = coefficient;
  return 1.0 - coefficient;
}

double shannon_entropy_at_k(const RecommendationLists& lists, std::size_t k) {
  const auto counts = exposure_counts(lists, k);
  std::size_t total = 0;
  for (const auto& [item, count] : counts) total += count;
  if (total == 0) return 0.0;
  double bits = 0.0;
  for (const auto& [item, count] : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(total);
    bits -= p * std::log2(p);
  }
  return bits;
}

PopularityPartition popularity_partition(const InteractionLog& train,
                                         double ratio) {
  std::map<std::string, std::size_t> popularity;
  for (const auto& item : train.items()) popularity[item] = 0;
  std::size_t total = 0;
  for (const auto& [user, items] : train.positives()) {
    for (const auto& item : items) {
      ++popularity[item];
      ++total;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(popularity.begin(),
                                                          popularity.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  PopularityPartition partition;
  double cumulative = 0.0;
  for (const auto& [item, count] : ranked) {
    // a zero-popularity item can never help reach the share target
    const bool head_done =
        total == 0 || cumulative >= ratio || count == 0;
    if (head_done) {
      partition.long_tail.insert(item);
    } else {
      partition.short_head.insert(item);
      cumulative +=
          static_cast<double>(count) / static_cast<double>(total);
    }
  }
  return partition;
}

double aclt_at_k(const RecommendationLists& lists,
                 const PopularityPartition& partition, std::size_t k,
                 std::map<std::string, double>* per_user) {
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [user, list] : lists) {
    std::size_t tail_hits = 0;
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n; ++r) {
      if (partition.long_tail.count(list.entries[r].first) > 0) ++tail_hits;
    }
    if (per_user != nullptr) {
      (*per_user)[user] = static_cast<double>(tail_hits);
    }
    sum += static_cast<double>(tail_hits);
  }
  return sum / static_cast<double>(lists.size());
}

double pop_rsp_at_k(const RecommendationLists& lists,
                    const PopularityPartition& partition,
                    const InteractionLog& train, std::size_t k) {
  double head_recommended = 0.0, tail_recommended = 0.0;
  double head_candidates = 0.0, tail_candidates = 0.0;
  for (const auto& [user, list] : lists) {
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& item = list.entries[r].first;
      if (partition.short_head.count(item) > 0) {
        head_recommended += 1.0;
      } else if (partition.long_tail.count(item) > 0) {
        tail_recommended += 1.0;
      }
    }
    for (const auto& item : partition.short_head) {
      if (!train.contains(user, item)) head_candidates += 1.0;
    }
    for (const auto& item : partition.long_tail) {
      if (!train.contains(user, item)) tail_candidates += 1.0;
    }
  }
  const double p_head =
      head_candidates > 0.0 ? head_recommended / head_candidates : 0.0;
  const double p_tail =
      tail_candidates > 0.0 ? tail_recommended / tail_candidates : 0.0;
  return ratio_spread(p_head, p_tail);
}

double pop_reo_at_k(const RecommendationLists& lists,
                    const PopularityPartition& partition,
                    const InteractionLog& test, std::size_t k) {
  double head_hits = 0.0, tail_hits = 0.0;
  double head_relevant = 0.0, tail_relevant = 0.0;
  for (const auto& [user, list] : lists) {
    const auto& relevant = test.items_of(user);
    const std::size_t n = effective_length(list, k);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& item = list.entries[r].first;
      if (!std::binary_search(relevant.begin(), relevant.end(), item)) {
        continue;
      }
      if (partition.short_head.count(item) > 0) {
        head_hits += 1.0;
      } else if (partition.long_tail.count(item) > 0) {
        tail_hits += 1.0;
      }
    }
    for (const auto& item : relevant) {
      if (partition.short_head.count(item) > 0) {
        head_relevant += 1.0;
      } else if (partition.long_tail.count(item) > 0) {
        tail_relevant += 1.0;
      }
    }
  }
  const double p_head = head_relevant > 0.0 ? head_hits / head_relevant : 0.0;
  const double p_tail = tail_relevant > 0.0 ? tail_hits / tail_relevant : 0.0;
  return ratio_spread(p_head, p_tail);
}

EvalReport evaluate_at(const RecommendationLists& lists, const Split& split,
                       const PopularityPartition& partition, std::size_t k) {
  EvalReport report;
  report.cutoff = k;
  report.ndcg = ndcg_at_k(lists, split.test, k, &report.ndcg_per_user);
  report.hit_ratio =
      hit_ratio_at_k(lists, split.test, k, &report.hit_per_user);
  report.item_coverage = item_coverage_at_k(lists, k);
  report.gini_diversity = gini_diversity_at_k(
      lists, k, split.train.items().size(), &report.gini_coefficient);
  report.shannon_entropy = shannon_entropy_at_k(lists, k);
  report.aclt = aclt_at_k(lists, partition, k, &report.aclt_per_user);
  report.pop_rsp = pop_rsp_at_k(lists, partition, split.train, k);
  report.pop_reo = pop_reo_at_k(lists, partition, split.test, k);
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(position);
  if (lower + 1 >= values.size()) return values.back();
  const double fraction = position - static_cast<double>(lower);
  return values[lower] + fraction * (values[lower + 1] - values[lower]);
}

SemanticsReport semantics_report(
    const RecommendationLists& lists,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train,
    const std::vector<std::size_t>& k_values, std::uint64_t seed) {
  SemanticsReport report;
  report.k_values = k_values;

  for (const auto& [user, entry] : weights) {
    for (const auto& [fid, gain] : entry.weights) {
      report.dataset_feature_gain[fid] += gain;
    }
  }

  std::map<std::size_t, std::vector<double>> samples;
  for (const auto& [user, list] : lists) {
    const auto weight_it = weights.find(user);
    if (weight_it == weights.end() || weight_it->second.weights.empty()) {
      continue;
    }

    // Features covered by the user's recommended items.
    std::vector<FeatureId> covered;
    std::vector<std::string> recommended;
    for (const auto& [item, score] : list.entries) {
      recommended.push_back(item);
      const auto& fids = catalog.features_of(item);
      covered.insert(covered.end(), fids.begin(), fids.end());
    }
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    std::sort(recommended.begin(), recommended.end());

    // Weight entries ranked by gain (descending), ties by ascending id.
    std::vector<std::pair<FeatureId, double>> ranked =
        weight_it->second.weights;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });

    for (const std::size_t k : k_values) {
      const std::size_t take =
          k == 0 ? ranked.size() : std::min(k, ranked.size());
      if (take == 0) continue;
      std::size_t preserved = 0;
      for (std::size_t i = 0; i < take; ++i) {
        if (std::binary_search(covered.begin(), covered.end(),
                               ranked[i].first)) {
          ++preserved;
        }
      }
      const double pct = 100.0 * static_cast<double>(preserved) /
                         static_cast<double>(take);
      report.per_user[user][k] = pct;
      samples[k].push_back(pct);
    }

    // Gain recomputation with the recommended items playing the positives,
    // against negatives drawn from what other users consumed.
    if (!recommended.empty()) {
      std::vector<std::string> pool;
      {
        std::set<std::string> candidates;
        for (const auto& [other, items] : train.positives()) {
          if (other == user) continue;
          for (const auto& item : items) {
            if (!std::binary_search(recommended.begin(), recommended.end(),
                                    item)) {
              candidates.insert(item);
            }
          }
        }
        pool.assign(candidates.begin(), candidates.end());
      }
      Rng rng(derive_seed(seed, "semantics", user));
      UserEntropyDataset relisted;
      relisted.user = user;
      relisted.positives = recommended;
      relisted.negatives = rng.sample(std::move(pool), recommended.size());
      std::sort(relisted.negatives.begin(), relisted.negatives.end());

      std::vector<FeatureId> list_features;
      for (const auto& item : recommended) {
        const auto& fids = catalog.features_of(item);
        list_features.insert(list_features.end(), fids.begin(), fids.end());
      }
      std::sort(list_features.begin(), list_features.end());
      list_features.erase(
          std::unique(list_features.begin(), list_features.end()),
          list_features.end());
      for (const FeatureId fid : list_features) {
        const double gain = information_gain(relisted, catalog, fid);
        if (gain > 0.0) report.list_feature_gain[fid] += gain;
      }
    }
  }

  for (const auto& [k, values] : samples) {
    report.quartiles[k] = {quantile(values, 0.25), quantile(values, 0.5),
                           quantile(values, 0.75)};
  }
  return report;
}

void write_metrics_report(const std::vector<EvalReport>& reports,
                          std::ostream& out) {
  for (const auto& report : reports) {
    const std::string at = "@" + std::to_string(report.cutoff);
    out << "ndcg" << at << " = " << format_double(report.ndcg) << '\n';
    out << "hit_ratio" << at << " = " << format_double(report.hit_ratio)
        << '\n';
    out << "item_coverage" << at << " = " << report.item_coverage << '\n';
    out << "gini_diversity" << at << " = "
        << format_double(report.gini_diversity) << '\n';
    out << "gini_coefficient" << at << " = "
        << format_double(report.gini_coefficient) << '\n';
    out << "shannon_entropy" << at << " = "
        << format_double(report.shannon_entropy) << '\n';
    out << "aclt" << at << " = " << format_double(report.aclt) << '\n';
    out << "pop_rsp" << at << " = " << format_double(report.pop_rsp) << '\n';
    out << "pop_reo" << at << " = " << format_double(report.pop_reo) << '\n';
  }
}

void write_per_user_metrics(const std::vector<EvalReport>& reports,
                            std::ostream& out) {
  out << "# metric\tcutoff\tuser\tvalue\n";
  for (const auto& report : reports) {
    for (const auto& [user, value] : report.ndcg_per_user) {
      out << "ndcg\t" << report.cutoff << '\t' << user << '\t'
          << format_double(value) << '\n';
    }
    for (const auto& [user, value] : report.hit_per_user) {
      out << "hit\t" << report.cutoff << '\t' << user << '\t'
          << format_double(value) << '\n';
    }
    for (const auto& [user, value] : report.aclt_per_user) {
      out << "aclt\t" << report.cutoff << '\t' << user << '\t'
          << format_double(value) << '\n';
    }
  }
}

void write_semantics_report(const SemanticsReport& report, std::ostream& out) {
  // k = 0 denotes the unlimited feature set.
  out << "# user <user> <k> <preserved-pct> | quartiles <k> <q1> <q2> <q3> | "
         "feature <id> <dataset-gain> <list-gain>\n";
  for (const auto& [user, per_k] : report.per_user) {
    for (const auto& [k, pct] : per_k) {
      out << "user\t" << user << '\t' << k << '\t' << format_double(pct)
          << '\n';
    }
  }
  for (const auto& [k, quartile] : report.quartiles) {
    out << "quartiles\t" << k << '\t' << format_double(quartile[0]) << '\t'
        << format_double(quartile[1]) << '\t' << format_double(quartile[2])
        << '\n';
  }
  std::set<FeatureId> fids;
  for (const auto& [fid, gain] : report.dataset_feature_gain) fids.insert(fid);
  for (const auto& [fid, gain] : report.list_feature_gain) fids.insert(fid);
  for (const FeatureId fid : fids) {
    const auto dataset_it = report.dataset_feature_gain.find(fid);
    const auto list_it = report.list_feature_gain.find(fid);
    out << "feature\t" << fid << '\t'
        << format_double(dataset_it == report.dataset_feature_gain.end()
                             ? 0.0
                             : dataset_it->second)
        << '\t'
        << format_double(list_it == report.list_feature_gain.end()
                             ? 0.0
                             : list_it->second)
        << '\n';
  }
}

}  // namespace kgrec
