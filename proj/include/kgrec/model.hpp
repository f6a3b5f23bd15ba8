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

#include <Eigen/Core>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kgrec/dataset.hpp"
#include "kgrec/entropy.hpp"
#include "kgrec/graph.hpp"

namespace kgrec {

// One trainable embedding row and bias per feature of the system, shared by
// all users. Rows are ordered by ascending feature id.
struct GlobalFeatureTable {
  Eigen::MatrixXd embeddings;  // active features x dim
  Eigen::VectorXd biases;
  std::vector<FeatureId> feature_ids;

  int dim() const { return static_cast<int>(embeddings.cols()); }
  // -1 when the feature has no row.
  int row_of(FeatureId id) const;
};

// A user's private embedding per retained feature. Rows are parallel to the
// user's weight entries, which are sorted by feature id.
struct PersonalEmbeddings {
  std::string user;
  std::vector<FeatureId> feature_ids;
  Eigen::MatrixXd vectors;  // retained features x dim
};

struct Model {
  GlobalFeatureTable global;
  std::map<std::string, PersonalEmbeddings> personal;
};

struct TrainConfig {
  int dim = 10;
  double learning_rate = 0.01;
  int epochs = 30;
  double l2 = 0.0;
  std::uint64_t seed = 42;
  double init_scale = 0.1;
  int threads = 1;
};

// Loss gradients of one ranking pair, restricted to the touched parameters:
// exactly the features of the positive or negative common-feature sets.
struct PairGradients {
  struct Entry {
    FeatureId fid;
    int personal_row;
    int global_row;
    Eigen::VectorXd d_personal;
    Eigen::VectorXd d_global;
    double d_bias;
  };
  double delta = 0.0;  // score(i+) - score(i-)
  double loss = 0.0;   // -ln sigmoid(delta)
  std::vector<Entry> entries;
};

// Gaussian init (scale * N(0,1)) for every global row and every retained
// personal row; biases start at zero. Identical seeds give identical bits.
Model init_model(const FeatureCatalog& catalog,
                 const std::map<std::string, UserFeatureWeights>& weights,
                 const TrainConfig& config);

// Weighted sum over the features shared by user and item:
// sum k_uf * (p_uf . g_f + b_f). Empty intersection scores zero.
double predict(const UserFeatureWeights& weights,
               const PersonalEmbeddings& personal,
               const GlobalFeatureTable& global,
               std::span<const FeatureId> item_features);

PairGradients bpr_gradients(const UserFeatureWeights& weights,
                            const PersonalEmbeddings& personal,
                            const GlobalFeatureTable& global,
                            std::span<const FeatureId> positive_features,
                            std::span<const FeatureId> negative_features);

// One SGD step on the pair: descend the BPR loss plus optional L2, touching
// only parameters of features shared with either item. Returns the pair loss
// before the update.
double bpr_step(const UserFeatureWeights& weights, PersonalEmbeddings& personal,
                GlobalFeatureTable& global,
                std::span<const FeatureId> positive_features,
                std::span<const FeatureId> negative_features,
                double learning_rate, double l2);

// Epoch-wise SGD over all train pairs in seeded shuffled order, one sampled
// negative per positive. Returns the mean pair loss per epoch. With
// threads == 1 the run is deterministic; with more threads, users are
// sharded per worker and the global table is updated without locks.
std::vector<double> train(const InteractionLog& train_log,
                          const FeatureCatalog& catalog,
                          const std::map<std::string, UserFeatureWeights>&
                              weights,
                          Model& model, const TrainConfig& config);

// Plain-text checkpoint carrying the global table and, per user, the
// retained features with weights and personal vectors. Values round-trip
// exactly, so a reloaded model predicts identically.
void save_model(const Model& model,
                const std::map<std::string, UserFeatureWeights>& weights,
                std::ostream& out);
std::pair<Model, std::map<std::string, UserFeatureWeights>> load_model(
    std::istream& in);

}  // namespace kgrec
