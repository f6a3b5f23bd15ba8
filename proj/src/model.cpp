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

#include "kgrec/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kgrec/io.hpp"

namespace kgrec {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -ln sigmoid(x), evaluated without overflow on either tail.
double softplus_neg(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

void fill_gaussian(Eigen::Ref<Eigen::MatrixXd> block, Rng& rng,
                   double scale) {
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      block(r, c) = scale * rng.gaussian();
    }
  }
}

}  // namespace

int GlobalFeatureTable::row_of(FeatureId id) const {
  const auto it =
      std::lower_bound(feature_ids.begin(), feature_ids.end(), id);
  if (it == feature_ids.end() || *it != id) return -1;
  return static_cast<int>(it - feature_ids.begin());
}

Model init_model(const FeatureCatalog& catalog,
                 const std::map<std::string, UserFeatureWeights>& weights,
                 const TrainConfig& config) {
  if (config.dim < 1) throw std::invalid_argument("dim must be >= 1");

  Model model;
  auto& global = model.global;
  global.feature_ids.reserve(catalog.feature_items().size());
  for (const auto& [fid, items] : catalog.feature_items()) {
    global.feature_ids.push_back(fid);
  }
  std::sort(global.feature_ids.begin(), global.feature_ids.end());

  const auto rows = static_cast<Eigen::Index>(global.feature_ids.size());
  global.embeddings.resize(rows, config.dim);
  global.biases = Eigen::VectorXd::Zero(rows);
  Rng global_rng(derive_seed(config.seed, "init-global"));
  fill_gaussian(global.embeddings, global_rng, config.init_scale);

  for (const auto& [user, entry] : weights) {
    PersonalEmbeddings personal;
    personal.user = user;
    personal.feature_ids.reserve(entry.weights.size());
    for (const auto& [fid, gain] : entry.weights) {
      personal.feature_ids.push_back(fid);
    }
    personal.vectors.resize(
        static_cast<Eigen::Index>(personal.feature_ids.size()), config.dim);
    Rng user_rng(derive_seed(config.seed, "init-personal", user));
    fill_gaussian(personal.vectors, user_rng, config.init_scale);
    model.personal.emplace(user, std::move(personal));
  }
  return model;
}

double predict(const UserFeatureWeights& weights,
               const PersonalEmbeddings& personal,
               const GlobalFeatureTable& global,
               std::span<const FeatureId> item_features) {
  assert(weights.weights.size() ==
         static_cast<std::size_t>(personal.vectors.rows()));
  double score = 0.0;
  std::size_t wi = 0;
  std::size_t ii = 0;
  while (wi < weights.weights.size() && ii < item_features.size()) {
    const FeatureId wf = weights.weights[wi].first;
    const FeatureId itf = item_features[ii];
    if (wf < itf) {
      ++wi;
    } else if (itf < wf) {
      ++ii;
    } else {
      const int grow = global.row_of(wf);
      assert(grow >= 0);
      score += weights.weights[wi].second *
               (personal.vectors.row(static_cast<Eigen::Index>(wi))
                    .dot(global.embeddings.row(grow)) +
                global.biases(grow));
      ++wi;
      ++ii;
    }
  }
  return score;
}

namespace {

struct Touched {
  FeatureId fid;
  double weight;
  int personal_row;
  int global_row;
  double coef;  // +1 positive side, -1 negative side, 0 shared by both
};

// Features of the user's retained set present in either item, with the sign
// each side contributes to the score difference.
std::vector<Touched> collect_touched(
    const UserFeatureWeights& weights, const GlobalFeatureTable& global,
    std::span<const FeatureId> positive_features,
    std::span<const FeatureId> negative_features) {
  std::vector<Touched> touched;
  for (std::size_t wi = 0; wi < weights.weights.size(); ++wi) {
    const auto [fid, weight] = weights.weights[wi];
    const bool in_pos = std::binary_search(positive_features.begin(),
                                           positive_features.end(), fid);
    const bool in_neg = std::binary_search(negative_features.begin(),
                                           negative_features.end(), fid);
    if (!in_pos && !in_neg) continue;
    touched.push_back(Touched{fid, weight, static_cast<int>(wi),
                              global.row_of(fid),
                              (in_pos ? 1.0 : 0.0) - (in_neg ? 1.0 : 0.0)});
  }
  return touched;
}

}  // namespace

PairGradients bpr_gradients(const UserFeatureWeights& weights,
                            const PersonalEmbeddings& personal,
                            const GlobalFeatureTable& global,
                            std::span<const FeatureId> positive_features,
                            std::span<const FeatureId> negative_features) {
  PairGradients result;
  const auto touched =
      collect_touched(weights, global, positive_features, negative_features);

  double delta = 0.0;
  for (const Touched& t : touched) {
    delta += t.coef * t.weight *
             (personal.vectors.row(t.personal_row)
                  .dot(global.embeddings.row(t.global_row)) +
              global.biases(t.global_row));
  }
  result.delta = delta;
  result.loss = softplus_neg(delta);

  // dL/dtheta = -sigmoid(-delta) * d(delta)/dtheta.
  const double slope = -sigmoid(-delta);
  result.entries.reserve(touched.size());
  for (const Touched& t : touched) {
    PairGradients::Entry entry;
    entry.fid = t.fid;
    entry.personal_row = t.personal_row;
    entry.global_row = t.global_row;
    entry.d_personal = slope * t.coef * t.weight *
                       global.embeddings.row(t.global_row).transpose();
    entry.d_global = slope * t.coef * t.weight *
                     personal.vectors.row(t.personal_row).transpose();
    entry.d_bias = slope * t.coef * t.weight;
    result.entries.push_back(std::move(entry));
  }
  return result;
}

double bpr_step(const UserFeatureWeights& weights, PersonalEmbeddings& personal,
                GlobalFeatureTable& global,
                std::span<const FeatureId> positive_features,
                std::span<const FeatureId> negative_features,
                double learning_rate, double l2) {
  const PairGradients gradients = bpr_gradients(
      weights, personal, global, positive_features, negative_features);
  for (const auto& entry : gradients.entries) {
    personal.vectors.row(entry.personal_row) -=
        learning_rate *
        (entry.d_personal.transpose() +
         l2 * personal.vectors.row(entry.personal_row));
    global.embeddings.row(entry.global_row) -=
        learning_rate * (entry.d_global.transpose() +
                         l2 * global.embeddings.row(entry.global_row));
    global.biases(entry.global_row) -=
        learning_rate * (entry.d_bias + l2 * global.biases(entry.global_row));
  }
  return gradients.loss;
}

namespace {

struct TrainPair {
  const std::string* user;
  const std::string* item;
};

double run_pairs(std::vector<TrainPair>& pairs, Rng& rng,
                 const InteractionLog& train_log, const FeatureCatalog& catalog,
                 const std::map<std::string, UserFeatureWeights>& weights,
                 Model& model, const TrainConfig& config) {
  rng.shuffle(pairs);
  double loss_sum = 0.0;
  for (const TrainPair& pair : pairs) {
    const std::string& user = *pair.user;
    const std::string& negative = sample_bpr_negative(train_log, user, rng);
    const auto& pos_features = catalog.features_of(*pair.item);
    const auto& neg_features = catalog.features_of(negative);
    loss_sum += bpr_step(weights.at(user), model.personal.at(user),
                         model.global, pos_features, neg_features,
                         config.learning_rate, config.l2);
  }
  return loss_sum;
}

}  // namespace

std::vector<double> train(const InteractionLog& train_log,
                          const FeatureCatalog& catalog,
                          const std::map<std::string, UserFeatureWeights>&
                              weights,
                          Model& model, const TrainConfig& config) {
  if (train_log.interaction_count() == 0) {
    throw std::runtime_error("training set is empty");
  }

  const int shards = std::max(1, config.threads);
  // Users are sharded so each worker owns its users' personal embeddings
  // exclusively; only the global table is contended.
  std::vector<std::vector<TrainPair>> shard_pairs(shards);
  {
    std::size_t user_index = 0;
    for (const auto& [user, items] : train_log.positives()) {
      auto& bucket = shard_pairs[user_index % shards];
      for (const auto& item : items) {
        bucket.push_back(TrainPair{&user, &item});
      }
      ++user_index;
    }
  }

  std::vector<Rng> shard_rngs;
  for (int s = 0; s < shards; ++s) {
    shard_rngs.emplace_back(
        derive_seed(config.seed, "train", std::to_string(s)));
  }

  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(std::max(0, config.epochs)));
  const double total_pairs =
      static_cast<double>(train_log.interaction_count());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (shards == 1) {
      epoch_losses.push_back(run_pairs(shard_pairs[0], shard_rngs[0],
                                       train_log, catalog, weights, model,
                                       config) /
                             total_pairs);
      continue;
    }
    std::vector<double> shard_loss(shards, 0.0);
    std::vector<std::thread> workers;
    for (int s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        shard_loss[s] = run_pairs(shard_pairs[s], shard_rngs[s], train_log,
                                  catalog, weights, model, config);
      });
    }
    for (auto& worker : workers) worker.join();
    double loss_sum = 0.0;
    for (const double loss : shard_loss) loss_sum += loss;
    epoch_losses.push_back(loss_sum / total_pairs);
  }
  return epoch_losses;
}

void save_model(const Model& model,
                const std::map<std::string, UserFeatureWeights>& weights,
                std::ostream& out) {
  out << "dim\t" << model.global.dim() << '\n';
  for (std::size_t row = 0; row < model.global.feature_ids.size(); ++row) {
    out << "G\t" << model.global.feature_ids[row] << '\t'
        << format_double(model.global.biases(static_cast<Eigen::Index>(row)));
    for (int c = 0; c < model.global.dim(); ++c) {
      out << '\t'
          << format_double(
                 model.global.embeddings(static_cast<Eigen::Index>(row), c));
    }
    out << '\n';
  }
  for (const auto& [user, personal] : model.personal) {
    const auto& entry = weights.at(user);
    out << "U\t" << user << '\t' << personal.feature_ids.size() << '\n';
    for (std::size_t row = 0; row < personal.feature_ids.size(); ++row) {
      out << "P\t" << personal.feature_ids[row] << '\t'
          << format_double(entry.weights[row].second);
      for (int c = 0; c < model.global.dim(); ++c) {
        out << '\t'
            << format_double(
                   personal.vectors(static_cast<Eigen::Index>(row), c));
      }
      out << '\n';
    }
  }
}

std::pair<Model, std::map<std::string, UserFeatureWeights>> load_model(
    std::istream& in) {
  Model model;
  std::map<std::string, UserFeatureWeights> weights;

  std::string line;
  std::size_t line_number = 0;
  int dim = -1;
  std::vector<std::pair<FeatureId, std::pair<double, Eigen::VectorXd>>>
      global_rows;
  PersonalEmbeddings* current_user = nullptr;
  UserFeatureWeights* current_weights = nullptr;
  std::vector<Eigen::VectorXd> personal_rows;

  const auto flush_user = [&]() {
    if (current_user == nullptr) return;
    if (!std::is_sorted(current_user->feature_ids.begin(),
                        current_user->feature_ids.end())) {
      throw ParseError("personal rows of user '" + current_user->user +
                       "' are not sorted by feature id");
    }
    current_user->vectors.resize(
        static_cast<Eigen::Index>(personal_rows.size()), dim);
    for (std::size_t r = 0; r < personal_rows.size(); ++r) {
      current_user->vectors.row(static_cast<Eigen::Index>(r)) =
          personal_rows[r].transpose();
    }
    personal_rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_tabs(text);
    if (fields[0] == "dim") {
      if (fields.size() != 2) throw ParseError("bad dim record", line_number);
      dim = static_cast<int>(parse_int(fields[1], line_number));
    } else if (fields[0] == "G") {
      if (dim < 1 || fields.size() != static_cast<std::size_t>(3 + dim)) {
        throw ParseError("bad global record", line_number);
      }
      const auto fid =
          static_cast<FeatureId>(parse_int(fields[1], line_number));
      const double bias = parse_double(fields[2], line_number);
      Eigen::VectorXd row(dim);
      for (int c = 0; c < dim; ++c) {
        row(c) = parse_double(fields[3 + c], line_number);
      }
      global_rows.emplace_back(fid, std::make_pair(bias, std::move(row)));
    } else if (fields[0] == "U") {
      if (fields.size() != 3) throw ParseError("bad user record", line_number);
      flush_user();
      const std::string user(fields[1]);
      auto& personal = model.personal[user];
      personal.user = user;
      auto& entry = weights[user];
      entry.user = user;
      current_user = &personal;
      current_weights = &entry;
    } else if (fields[0] == "P") {
      if (current_user == nullptr || dim < 1 ||
          fields.size() != static_cast<std::size_t>(3 + dim)) {
        throw ParseError("bad personal record", line_number);
      }
      const auto fid =
          static_cast<FeatureId>(parse_int(fields[1], line_number));
      current_user->feature_ids.push_back(fid);
      current_weights->weights.emplace_back(
          fid, parse_double(fields[2], line_number));
      Eigen::VectorXd row(dim);
      for (int c = 0; c < dim; ++c) {
        row(c) = parse_double(fields[3 + c], line_number);
      }
      personal_rows.push_back(std::move(row));
    } else {
      throw ParseError("unknown record type '" + std::string(fields[0]) + "'",
                       line_number);
    }
  }
  flush_user();
  if (dim < 1) throw ParseError("model file has no dim record");

  std::sort(global_rows.begin(), global_rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  model.global.feature_ids.reserve(global_rows.size());
  model.global.embeddings.resize(
      static_cast<Eigen::Index>(global_rows.size()), dim);
  model.global.biases.resize(static_cast<Eigen::Index>(global_rows.size()));
  for (std::size_t r = 0; r < global_rows.size(); ++r) {
    model.global.feature_ids.push_back(global_rows[r].first);
    model.global.biases(static_cast<Eigen::Index>(r)) =
        global_rows[r].second.first;
    model.global.embeddings.row(static_cast<Eigen::Index>(r)) =
        global_rows[r].second.second.transpose();
  }
  return {std::move(model), std::move(weights)};
}

}  // namespace kgrec
