// Copyright 2026 The aurec Authors
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

#ifndef AUREC_BACKBONE_H_
#define AUREC_BACKBONE_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "aurec/dataset.h"
#include "aurec/types.h"

namespace aurec {

enum class BackboneKind { kMf, kLightGcn };

// "mf" or "lightgcn"; throws ConfigError otherwise.
BackboneKind ParseBackboneKind(std::string_view name);
std::string_view BackboneKindName(BackboneKind kind);

// Symmetric D^-1/2 A D^-1/2 over the (users + items) bipartite train graph.
// Users occupy rows [0, m), items rows [m, m + n).
class NormalizedAdjacency {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  NormalizedAdjacency() = default;
  static NormalizedAdjacency Build(const InteractionDataset& dataset);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }
  int num_nodes() const { return num_users_ + num_items_; }
  const SparseMatrix& matrix() const { return matrix_; }

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  SparseMatrix matrix_;
};

// Expectation estimator parameters. For MF the tables are the final
// embeddings; for LightGCN they are the layer-0 embeddings that get
// propagated over `adjacency`.
struct BackboneModel {
  BackboneKind kind = BackboneKind::kMf;
  int num_layers = 3;  // LightGCN only
  Matrix user_embeddings;
  Matrix item_embeddings;
  NormalizedAdjacency adjacency;  // LightGCN only

  int num_users() const { return static_cast<int>(user_embeddings.rows()); }
  int num_items() const { return static_cast<int>(item_embeddings.rows()); }
  int dim() const { return static_cast<int>(user_embeddings.cols()); }
  double SquaredNorm() const;
};

// i.i.d. N(0, 0.1^2) embeddings; builds the adjacency for LightGCN.
BackboneModel InitBackbone(BackboneKind kind, const InteractionDataset& dataset,
                           int dim, int num_layers, std::uint64_t seed);

// Embeddings whose inner products are the predictions r_ui.
struct FinalEmbeddings {
  Matrix users;
  Matrix items;

  double Predict(UserId u, ItemId i) const {
    return users.row(u).dot(items.row(i));
  }
  // r_u. for every item.
  Vector ScoreUser(UserId u) const;
};

// <p_u, q_i> on the raw MF tables.
double MfPredict(const BackboneModel& model, UserId u, ItemId i);

// LightGCN: E(k+1) = A E(k), final = mean of E(0..L). MF: identity.
// Throws DataError if the adjacency does not match the embedding tables.
FinalEmbeddings Propagate(const BackboneModel& model);

// Maps gradients w.r.t. the final embeddings onto the parameter tables.
// Propagation is linear and A symmetric, so this is the same mean of powers.
void BackpropagateEmbeddings(const BackboneModel& model, Matrix& grad_users,
                             Matrix& grad_items);

// Per-user negatives drawn for one batch. Positives (the train history)
// always carry weight 1 and are not listed.
struct NegativeWeightPlan {
  double sampling_rate = 1.0;
  std::uint64_t seed = 0;
  int epoch = 0;
  std::vector<UserId> users;
  std::vector<std::vector<ItemId>> negatives;  // aligned with users, sorted
};

// Every item outside H_u is kept independently with probability `rate`.
// The draw for a user depends only on (seed, epoch, user). Throws
// ConfigError unless rate is in (0, 1].
NegativeWeightPlan SampleNegativeWeights(const InteractionDataset& dataset,
                                         std::span<const UserId> users,
                                         double rate, std::uint64_t seed,
                                         int epoch);

struct BackboneGradient {
  Matrix users;
  Matrix items;
};

// Mean over included (u, i) of w (r - Y)^2 / 2 plus l2 * ||theta||^2.
// Fills `grad` (parameter-space) when non-null.
double BackboneLoss(const BackboneModel& model,
                    const InteractionDataset& dataset,
                    const NegativeWeightPlan& plan, double l2,
                    BackboneGradient* grad = nullptr);

struct BackboneTrainConfig {
  BackboneKind kind = BackboneKind::kMf;
  int dim = 128;
  int num_layers = 3;
  double learning_rate = 1e-4;
  int batch_size = 32;
  int epochs = 100;
  double l2 = 1e-4;
  double negative_rate = 0.1;
  std::uint64_t seed = 1;
  // Stop once the relative change of the epoch loss stays below 1e-5 for
  // 10 consecutive epochs.
  bool early_stop = false;

  void Validate() const;
};

struct BackboneTrainResult {
  BackboneModel model;
  std::vector<double> loss_trace;  // mean batch loss per epoch
};

// User-batched Adam on the weighted squared loss with fresh negatives each
// epoch. Throws DivergenceError on a non-finite loss.
BackboneTrainResult TrainBackbone(const InteractionDataset& dataset,
                                  const BackboneTrainConfig& config);

// Deterministic per-epoch user order split into batches.
std::vector<std::vector<UserId>> MakeUserBatches(int num_users, int batch_size,
                                                 std::uint64_t seed,
                                                 int epoch);

}  // namespace aurec

#endif  // AUREC_BACKBONE_H_
