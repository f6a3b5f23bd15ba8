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
#include <vector>

#include "kgrec/rng.hpp"

namespace kgrec {

// Binarized implicit feedback: per user, the set of consumed items. Item and
// user lists are kept sorted; per-user item vectors behave as sets.
class InteractionLog {
 public:
  void add(const std::string& user, const std::string& item);
  // Registers an item as part of the catalog even when nobody consumed it
  // (train/test views of a split share the parent's item universe).
  void register_item(const std::string& item);
  void register_user(const std::string& user);

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }
  const std::map<std::string, std::vector<std::string>>& positives() const {
    return positives_;
  }
  const std::vector<std::string>& items_of(const std::string& user) const;
  bool contains(const std::string& user, const std::string& item) const;
  bool has_user(const std::string& user) const;
  std::size_t interaction_count() const;

 private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::map<std::string, std::vector<std::string>> positives_;
};

struct Split {
  InteractionLog train;
  InteractionLog test;
};

// user/item[/rating[/extra...]] TSV. With a rating column, keeps pairs rated
// at or above `threshold`; without one, every pair is a positive.
InteractionLog load_ratings(std::istream& in, double threshold);

// Iteratively removes users and items with fewer than k interactions until
// both degree conditions hold. The result may be empty.
InteractionLog k_core(const InteractionLog& log, std::size_t k);

// Per user, a seeded permutation of the items split at ceil(ratio * n) into
// train/test. The ceil keeps single-interaction users trainable; their test
// share is empty. Both views keep the parent's full user and item sets.
Split holdout_split(const InteractionLog& log, double train_ratio,
                    std::uint64_t seed);

// Exactly |I_u| items drawn without replacement from the items other users
// consumed minus the user's own; the whole pool when it is smaller.
std::vector<std::string> sample_entropy_negatives(const InteractionLog& log,
                                                  const std::string& user,
                                                  std::uint64_t seed);

// One uniform draw from the catalog outside the user's items, by rejection.
std::string sample_bpr_negative(const InteractionLog& log,
                                const std::string& user, Rng& rng);

// user<TAB>item rows, users ascending, items ascending.
void write_interactions(const InteractionLog& log, std::ostream& out);

}  // namespace kgrec
