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

#include "kgrec/recommend.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "kgrec/io.hpp"

namespace kgrec {

RecommendationList recommend_top_k(
    const std::string& user, const Model& model,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train_log,
    std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto weight_it = weights.find(user);
  const auto personal_it = model.personal.find(user);
  if (weight_it == weights.end() || personal_it == model.personal.end()) {
    throw std::invalid_argument("unknown user: " + user);
  }

  RecommendationList list;
  list.user = user;
  const auto& consumed = train_log.items_of(user);
  for (const auto& item : train_log.items()) {
    if (std::binary_search(consumed.begin(), consumed.end(), item)) continue;
    const double score = predict(weight_it->second, personal_it->second,
                                 model.global, catalog.features_of(item));
    list.entries.emplace_back(item, score);
  }
  std::sort(list.entries.begin(), list.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (list.entries.size() > k) list.entries.resize(k);
  return list;
}

std::map<std::string, RecommendationList> recommend_all(
    const Model& model,
    const std::map<std::string, UserFeatureWeights>& weights,
    const FeatureCatalog& catalog, const InteractionLog& train_log,
    std::size_t k, int threads) {
  const auto& users = train_log.users();
  std::vector<RecommendationList> lists(users.size());

  const auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      lists[i] =
          recommend_top_k(users[i], model, weights, catalog, train_log, k);
    }
  };

  if (threads <= 1 || users.size() < 2) {
    worker(0, users.size());
  } else {
    const std::size_t n = static_cast<std::size_t>(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) {
      pool.emplace_back(worker, users.size() * t / n,
                        users.size() * (t + 1) / n);
    }
    for (auto& thread : pool) thread.join();
  }

  std::map<std::string, RecommendationList> result;
  for (auto& list : lists) {
    std::string user = list.user;
    result.emplace(std::move(user), std::move(list));
  }
  return result;
}

void write_recommendations(
    const std::map<std::string, RecommendationList>& lists,
    std::ostream& out) {
  out << "# user\titem\tscore\trank\n";
  for (const auto& [user, list] : lists) {
    std::size_t rank = 1;
    for (const auto& [item, score] : list.entries) {
      out << user << '\t' << item << '\t' << format_double(score) << '\t'
          << rank << '\n';
      ++rank;
    }
  }
}

}  // namespace kgrec
