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

#include "kgrec/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "kgrec/io.hpp"

namespace kgrec {

double UserFeatureWeights::weight_of(FeatureId id) const {
  const auto it = std::lower_bound(
      weights.begin(), weights.end(), id,
      [](const auto& entry, FeatureId key) { return entry.first < key; });
  if (it == weights.end() || it->first != id) return -1.0;
  return it->second;
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("binary_entropy requires q in [0, 1]");
  }
  double bits = 0.0;
  if (q > 0.0) bits -= q * std::log2(q);
  if (q < 1.0) bits -= (1.0 - q) * std::log2(1.0 - q);
  return bits;
}

namespace {

bool item_has_feature(const FeatureCatalog& catalog, const std::string& item,
                      FeatureId feature) {
  const auto& fids = catalog.features_of(item);
  return std::binary_search(fids.begin(), fids.end(), feature);
}

// Weighted entropy of one side of the presence partition:
// (t / |D|) * B(p / t), zero when the side is empty.
double partition_entropy(std::size_t p, std::size_t n, std::size_t total) {
  const std::size_t t = p + n;
  if (t == 0) return 0.0;
  return (static_cast<double>(t) / static_cast<double>(total)) *
         binary_entropy(static_cast<double>(p) / static_cast<double>(t));
}

}  // namespace

double information_gain(const UserEntropyDataset& dataset,
                        const FeatureCatalog& catalog, FeatureId feature) {
  const std::size_t total = dataset.size();
  if (total == 0) {
    throw std::invalid_argument("information gain over an empty dataset");
  }
  std::size_t positives_with = 0;
  for (const auto& item : dataset.positives) {
    if (item_has_feature(catalog, item, feature)) ++positives_with;
  }
  std::size_t negatives_with = 0;
  for (const auto& item : dataset.negatives) {
    if (item_has_feature(catalog, item, feature)) ++negatives_with;
  }
  const std::size_t positives_without =
      dataset.positives.size() - positives_with;
  const std::size_t negatives_without =
      dataset.negatives.size() - negatives_with;

  const double base = binary_entropy(
      static_cast<double>(dataset.positives.size()) /
      static_cast<double>(total));
  return base - partition_entropy(positives_with, negatives_with, total) -
         partition_entropy(positives_without, negatives_without, total);
}

UserEntropyDataset make_entropy_dataset(const InteractionLog& log,
                                        const std::string& user,
                                        std::uint64_t seed) {
  UserEntropyDataset dataset;
  dataset.user = user;
  dataset.positives = log.items_of(user);
  dataset.negatives = sample_entropy_negatives(log, user, seed);
  return dataset;
}

UserFeatureWeights compute_user_weights(const UserEntropyDataset& dataset,
                                        const FeatureCatalog& catalog,
                                        const WeightOptions& options) {
  UserFeatureWeights result;
  result.user = dataset.user;

  // F_u: the union of the positive items' feature sets.
  std::vector<FeatureId> user_features;
  for (const auto& item : dataset.positives) {
    const auto& fids = catalog.features_of(item);
    user_features.insert(user_features.end(), fids.begin(), fids.end());
  }
  std::sort(user_features.begin(), user_features.end());
  user_features.erase(
      std::unique(user_features.begin(), user_features.end()),
      user_features.end());
  if (user_features.empty()) return result;

  // Scored candidates grouped by hop depth.
  std::map<int, std::vector<std::pair<FeatureId, double>>> by_depth;
  for (const FeatureId fid : user_features) {
    const int depth = catalog.feature(fid).depth();
    if (options.hop_mask && options.hop_mask->count(depth) == 0) continue;
    const double gain = information_gain(dataset, catalog, fid);
    if (gain <= options.ig_cutoff) continue;
    by_depth[depth].emplace_back(fid, gain);
  }

  for (auto& [depth, candidates] : by_depth) {
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    const std::size_t keep =
        options.per_hop_limit == 0
            ? candidates.size()
            : std::min(candidates.size(), options.per_hop_limit);
    for (std::size_t i = 0; i < keep; ++i) {
      result.weights.push_back(candidates[i]);
    }
  }
  std::sort(result.weights.begin(), result.weights.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return result;
}

std::map<std::string, UserFeatureWeights> compute_all_weights(
    const InteractionLog& log, const FeatureCatalog& catalog,
    const WeightOptions& options, std::uint64_t negative_seed, int threads) {
  const auto& users = log.users();
  std::vector<UserFeatureWeights> computed(users.size());

  const auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto dataset = make_entropy_dataset(log, users[i], negative_seed);
      computed[i] = compute_user_weights(dataset, catalog, options);
    }
  };

  if (threads <= 1 || users.size() < 2) {
    worker(0, users.size());
  } else {
    const std::size_t n = static_cast<std::size_t>(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t begin = users.size() * t / n;
      const std::size_t end = users.size() * (t + 1) / n;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& thread : pool) thread.join();
  }

  std::map<std::string, UserFeatureWeights> result;
  for (std::size_t i = 0; i < users.size(); ++i) {
    result.emplace(users[i], std::move(computed[i]));
  }
  return result;
}

void write_weights(const std::map<std::string, UserFeatureWeights>& weights,
                   std::ostream& out) {
  out << "# user\tfeature_id\tgain\n";
  for (const auto& [user, entry] : weights) {
    for (const auto& [fid, gain] : entry.weights) {
      out << user << '\t' << fid << '\t' << format_double(gain) << '\n';
    }
  }
}

std::map<std::string, UserFeatureWeights> read_weights(std::istream& in) {
  std::map<std::string, UserFeatureWeights> result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 3) {
      throw ParseError("expected user<TAB>feature-id<TAB>weight", line_number);
    }
    const std::string user(fields[0]);
    auto& entry = result[user];
    entry.user = user;
    entry.weights.emplace_back(
        static_cast<FeatureId>(parse_int(fields[1], line_number)),
        parse_double(fields[2], line_number));
  }
  for (auto& [user, entry] : result) {
    std::sort(entry.weights.begin(), entry.weights.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return result;
}

}  // namespace kgrec
