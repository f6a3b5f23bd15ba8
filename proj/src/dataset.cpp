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

#include "kgrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "kgrec/io.hpp"

namespace kgrec {

namespace {

void insert_sorted(std::vector<std::string>& values,
                   const std::string& value) {
  // appends dominate when input arrives in order
  if (values.empty() || values.back() < value) {
    values.push_back(value);
    return;
  }
  const auto it = std::lower_bound(values.begin(), values.end(), value);
  if (it == values.end() || *it != value) values.insert(it, value);
}

bool contains_sorted(const std::vector<std::string>& values,
                     const std::string& value) {
  return std::binary_search(values.begin(), values.end(), value);
}

// Bulk construction from set-accumulated pairs; linear in the output.
InteractionLog from_buckets(
    const std::map<std::string, std::set<std::string>>& buckets) {
  InteractionLog log;
  std::set<std::string> items;
  for (const auto& [user, user_items] : buckets) {
    log.register_user(user);
    items.insert(user_items.begin(), user_items.end());
  }
  for (const auto& item : items) log.register_item(item);
  for (const auto& [user, user_items] : buckets) {
    for (const auto& item : user_items) log.add(user, item);
  }
  return log;
}

}  // namespace

void InteractionLog::add(const std::string& user, const std::string& item) {
  insert_sorted(users_, user);
  insert_sorted(items_, item);
  insert_sorted(positives_[user], item);
}

void InteractionLog::register_item(const std::string& item) {
  insert_sorted(items_, item);
}

void InteractionLog::register_user(const std::string& user) {
  insert_sorted(users_, user);
  positives_.try_emplace(user);
}

const std::vector<std::string>& InteractionLog::items_of(
    const std::string& user) const {
  static const std::vector<std::string> kEmpty;
  const auto it = positives_.find(user);
  return it == positives_.end() ? kEmpty : it->second;
}

bool InteractionLog::contains(const std::string& user,
                              const std::string& item) const {
  return contains_sorted(items_of(user), item);
}

bool InteractionLog::has_user(const std::string& user) const {
  return positives_.count(user) > 0;
}

std::size_t InteractionLog::interaction_count() const {
  std::size_t total = 0;
  for (const auto& [user, items] : positives_) total += items.size();
  return total;
}

InteractionLog load_ratings(std::istream& in, double threshold) {
  std::map<std::string, std::set<std::string>> buckets;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_tabs(text);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected user<TAB>item[<TAB>rating]", line_number);
    }
    if (fields.size() >= 3) {
      const double rating = parse_double(fields[2], line_number);
      if (rating < threshold) continue;
    }
    buckets[std::string(fields[0])].emplace(fields[1]);
  }
  return from_buckets(buckets);
}

InteractionLog k_core(const InteractionLog& log, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k-core requires k >= 1");

  std::map<std::string, std::set<std::string>> by_user;
  std::map<std::string, std::set<std::string>> by_item;
  for (const auto& [user, items] : log.positives()) {
    for (const auto& item : items) {
      by_user[user].insert(item);
      by_item[item].insert(user);
    }
  }

  // Alternate a user pass and an item pass until neither removes anything.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = by_user.begin(); it != by_user.end();) {
      if (it->second.size() < k) {
        for (const auto& item : it->second) {
          by_item[item].erase(it->first);
        }
        it = by_user.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
    for (auto it = by_item.begin(); it != by_item.end();) {
      if (it->second.size() < k) {
        for (const auto& user : it->second) {
          by_user[user].erase(it->first);
        }
        it = by_item.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }

  return from_buckets(by_user);
}

Split holdout_split(const InteractionLog& log, double train_ratio,
                    std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("train_ratio must be in (0, 1)");
  }
  Split split;
  for (const auto& item : log.items()) {
    split.train.register_item(item);
    split.test.register_item(item);
  }
  for (const auto& [user, items] : log.positives()) {
    std::vector<std::string> shuffled = items;
    // Per-user sub-seed: a user's split does not depend on the other users.
    Rng rng(derive_seed(seed, "holdout", user));
    rng.shuffle(shuffled);
    const auto train_size = static_cast<std::size_t>(
        std::ceil(train_ratio * static_cast<double>(shuffled.size())));
    split.train.register_user(user);
    split.test.register_user(user);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      if (i < train_size) {
        split.train.add(user, shuffled[i]);
      } else {
        split.test.add(user, shuffled[i]);
      }
    }
  }
  return split;
}

std::vector<std::string> sample_entropy_negatives(const InteractionLog& log,
                                                  const std::string& user,
                                                  std::uint64_t seed) {
  if (!log.has_user(user)) {
    throw std::invalid_argument("unknown user: " + user);
  }
  const auto& own = log.items_of(user);
  std::vector<std::string> pool;
  {
    std::set<std::string> candidates;
    for (const auto& [other, items] : log.positives()) {
      if (other == user) continue;
      for (const auto& item : items) {
        if (!contains_sorted(own, item)) candidates.insert(item);
      }
    }
    pool.assign(candidates.begin(), candidates.end());
  }
  Rng rng(derive_seed(seed, "entropy-negatives", user));
  auto sampled = rng.sample(std::move(pool), own.size());
  std::sort(sampled.begin(), sampled.end());
  return sampled;
}

std::string sample_bpr_negative(const InteractionLog& log,
                                const std::string& user, Rng& rng) {
  const auto& own = log.items_of(user);
  const auto& catalog = log.items();
  if (own.size() >= catalog.size()) {
    throw std::runtime_error("user '" + user +
                             "' has consumed the entire catalog");
  }
  while (true) {
    const auto& candidate = catalog[rng.below(catalog.size())];
    if (!contains_sorted(own, candidate)) return candidate;
  }
}

void write_interactions(const InteractionLog& log, std::ostream& out) {
  out << "# user\titem\n";
  for (const auto& [user, items] : log.positives()) {
    for (const auto& item : items) {
      out << user << '\t' << item << '\n';
    }
  }
}

}  // namespace kgrec
