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

#include "aurec/backbone.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "aurec/errors.h"
#include "aurec/optim.h"
#include "aurec/rng.h"

namespace aurec {
namespace {

// Stream tags for DeriveSeed.
constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;
constexpr std::uint64_t kNegativeStream = 13;

Matrix Stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// (1 / (L + 1)) * sum_{k=0..L} A^k X, done in place on the stacked tables.
void MeanOfPowers(const NormalizedAdjacency& adjacency, int num_layers,
                  Matrix& users, Matrix& items) {
  if (adjacency.num_users() != users.rows() ||
      adjacency.num_items() != items.rows()) {
    throw DataError("LightGCN adjacency is " +
                    std::to_string(adjacency.num_users()) + "x" +
                    std::to_string(adjacency.num_items()) +
                    " but embeddings are " + std::to_string(users.rows()) +
                    "x" + std::to_string(items.rows()));
  }
  Matrix current = Stack(users, items);
  Matrix sum = current;
  for (int layer = 0; layer < num_layers; ++layer) {
    Matrix next = adjacency.matrix() * current;
    sum += next;
    current = std::move(next);
  }
  sum /= static_cast<double>(num_layers + 1);
  users = sum.topRows(users.rows());
  items = sum.bottomRows(items.rows());
}

}  // namespace

BackboneKind ParseBackboneKind(std::string_view name) {
  if (name == "mf") return BackboneKind::kMf;
  if (name == "lightgcn") return BackboneKind::kLightGcn;
  throw ConfigError("unknown backbone '" + std::string(name) +
                    "' (expected mf or lightgcn)");
}

std::string_view BackboneKindName(BackboneKind kind) {
  return kind == BackboneKind::kLightGcn ? "lightgcn" : "mf";
}

NormalizedAdjacency NormalizedAdjacency::Build(
    const InteractionDataset& dataset) {
  NormalizedAdjacency adj;
  adj.num_users_ = dataset.num_users();
  adj.num_items_ = dataset.num_items();
  const int m = adj.num_users_;
  auto popularity = dataset.item_popularity();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * static_cast<std::size_t>(dataset.num_train_interactions()));
  for (UserId u = 0; u < m; ++u) {
    auto history = dataset.train_items(u);
    const double user_degree = static_cast<double>(history.size());
    for (ItemId i : history) {
      const double w =
          1.0 / std::sqrt(user_degree * static_cast<double>(popularity[i]));
      triplets.emplace_back(u, m + i, w);
      triplets.emplace_back(m + i, u, w);
    }
  }
  adj.matrix_.resize(adj.num_nodes(), adj.num_nodes());
  adj.matrix_.setFromTriplets(triplets.begin(), triplets.end());
  adj.matrix_.makeCompressed();
  return adj;
}

double BackboneModel::SquaredNorm() const {
  return user_embeddings.squaredNorm() + item_embeddings.squaredNorm();
}

BackboneModel InitBackbone(BackboneKind kind, const InteractionDataset& dataset,
                           int dim, int num_layers, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dim must be >= 1");
  if (num_layers < 0) throw ConfigError("num_layers must be >= 0");
  BackboneModel model;
  model.kind = kind;
  model.num_layers = num_layers;
  model.user_embeddings.resize(dataset.num_users(), dim);
  model.item_embeddings.resize(dataset.num_items(), dim);
  std::mt19937_64 rng(DeriveSeed(seed, {kInitStream}));
  std::normal_distribution<double> normal(0.0, 0.1);
  for (Matrix* table : {&model.user_embeddings, &model.item_embeddings}) {
    for (Eigen::Index k = 0; k < table->size(); ++k) {
      table->data()[k] = normal(rng);
    }
  }
  if (kind == BackboneKind::kLightGcn) {
    model.adjacency = NormalizedAdjacency::Build(dataset);
  }
  return model;
}

Vector FinalEmbeddings::ScoreUser(UserId u) const {
  return items * users.row(u).transpose();
}

double MfPredict(const BackboneModel& model, UserId u, ItemId i) {
  return model.user_embeddings.row(u).dot(model.item_embeddings.row(i));
}

FinalEmbeddings Propagate(const BackboneModel& model) {
  FinalEmbeddings out{model.user_embeddings, model.item_embeddings};
  if (model.kind == BackboneKind::kLightGcn) {
    MeanOfPowers(model.adjacency, model.num_layers, out.users, out.items);
  }
  return out;
}

void BackpropagateEmbeddings(const BackboneModel& model, Matrix& grad_users,
                             Matrix& grad_items) {
  if (model.kind == BackboneKind::kLightGcn) {
    MeanOfPowers(model.adjacency, model.num_layers, grad_users, grad_items);
  }
}

NegativeWeightPlan SampleNegativeWeights(const InteractionDataset& dataset,
                                         std::span<const UserId> users,
                                         double rate, std::uint64_t seed,
                                         int epoch) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ConfigError("negative sampling rate must lie in (0, 1], got " +
                      std::to_string(rate));
  }
  NegativeWeightPlan plan;
  plan.sampling_rate = rate;
  plan.seed = seed;
  plan.epoch = epoch;
  plan.users.assign(users.begin(), users.end());
  plan.negatives.resize(users.size());
  const int n = dataset.num_items();
  for (std::size_t b = 0; b < users.size(); ++b) {
    const UserId u = users[b];
    std::mt19937_64 rng(DeriveSeed(
        seed, {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(u)}));
    auto history = dataset.train_items(u);
    auto& out = plan.negatives[b];
    auto next_positive = history.begin();
    for (ItemId i = 0; i < n; ++i) {
      if (next_positive != history.end() && *next_positive == i) {
        ++next_positive;
        continue;
      }
      if (rate >= 1.0 || UniformUnit(rng) < rate) out.push_back(i);
    }
  }
  return plan;
}

double BackboneLoss(const BackboneModel& model,
                    const InteractionDataset& dataset,
                    const NegativeWeightPlan& plan, double l2,
                    BackboneGradient* grad) {
  const FinalEmbeddings final_emb = Propagate(model);

  std::size_t num_terms = 0;
  for (std::size_t b = 0; b < plan.users.size(); ++b) {
    num_terms += dataset.train_items(plan.users[b]).size() +
                 plan.negatives[b].size();
  }
  const double inv_terms =
      num_terms > 0 ? 1.0 / static_cast<double>(num_terms) : 0.0;

  Matrix grad_users, grad_items;
  if (grad) {
    grad_users = Matrix::Zero(final_emb.users.rows(), final_emb.users.cols());
    grad_items = Matrix::Zero(final_emb.items.rows(), final_emb.items.cols());
  }

  double data = 0.0;
  auto accumulate = [&](UserId u, ItemId i, double label) {
    const double r = final_emb.Predict(u, i);
    if (!std::isfinite(r)) {
      throw NumericError("non-finite prediction for (user " +
                         std::to_string(u) + ", item " + std::to_string(i) +
                         ")");
    }
    const double diff = r - label;
    data += 0.5 * diff * diff;
    if (grad) {
      const double g = diff * inv_terms;
      grad_users.row(u) += g * final_emb.items.row(i);
      grad_items.row(i) += g * final_emb.users.row(u);
    }
  };
  for (std::size_t b = 0; b < plan.users.size(); ++b) {
    const UserId u = plan.users[b];
    for (ItemId i : dataset.train_items(u)) accumulate(u, i, 1.0);
    for (ItemId i : plan.negatives[b]) accumulate(u, i, 0.0);
  }

  if (grad) {
    BackpropagateEmbeddings(model, grad_users, grad_items);
    grad_users += (2.0 * l2) * model.user_embeddings;
    grad_items += (2.0 * l2) * model.item_embeddings;
    grad->users = std::move(grad_users);
    grad->items = std::move(grad_items);
  }
  return data * inv_terms + l2 * model.SquaredNorm();
}

void BackboneTrainConfig::Validate() const {
  if (dim < 1) throw ConfigError("backbone dim must be >= 1");
  if (num_layers < 0) throw ConfigError("num_layers must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(l2 >= 0.0)) throw ConfigError("l2 coefficient must be >= 0");
  if (!(negative_rate > 0.0 && negative_rate <= 1.0)) {
    throw ConfigError("negative sampling rate must lie in (0, 1]");
  }
  AdamOptions{learning_rate}.Validate();
}

std::vector<std::vector<UserId>> MakeUserBatches(int num_users, int batch_size,
                                                 std::uint64_t seed,
                                                 int epoch) {
  std::vector<UserId> order(num_users);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(
      DeriveSeed(seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)}));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<UserId>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

BackboneTrainResult TrainBackbone(const InteractionDataset& dataset,
                                  const BackboneTrainConfig& config) {
  config.Validate();
  BackboneTrainResult result;
  result.model = InitBackbone(config.kind, dataset, config.dim,
                              config.num_layers, config.seed);
  BackboneModel& model = result.model;

  const AdamOptions adam{config.learning_rate};
  AdamState user_state(model.user_embeddings.size(), adam);
  AdamState item_state(model.item_embeddings.size(), adam);
  const std::uint64_t negative_seed =
      DeriveSeed(config.seed, {kNegativeStream});

  int quiet_epochs = 0;
  BackboneGradient grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    auto batches = MakeUserBatches(dataset.num_users(), config.batch_size,
                                   config.seed, epoch);
    for (const auto& batch : batches) {
      NegativeWeightPlan plan = SampleNegativeWeights(
          dataset, batch, config.negative_rate, negative_seed, epoch);
      double loss = 0.0;
      try {
        loss = BackboneLoss(model, dataset, plan, config.l2, &grad);
        if (!std::isfinite(loss)) throw NumericError("non-finite loss");
        user_state.Step({model.user_embeddings.data(),
                         static_cast<std::size_t>(model.user_embeddings.size())},
                        {grad.users.data(),
                         static_cast<std::size_t>(grad.users.size())});
        item_state.Step({model.item_embeddings.data(),
                         static_cast<std::size_t>(model.item_embeddings.size())},
                        {grad.items.data(),
                         static_cast<std::size_t>(grad.items.size())});
      } catch (const NumericError&) {
        throw DivergenceError("backbone training", epoch);
      }
      epoch_loss += loss;
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(1, batches.size()));
    if (config.early_stop && !result.loss_trace.empty()) {
      const double prev = result.loss_trace.back();
      const double rel =
          std::abs(epoch_loss - prev) / std::max(1e-300, std::abs(prev));
      quiet_epochs = rel < 1e-5 ? quiet_epochs + 1 : 0;
    }
    result.loss_trace.push_back(epoch_loss);
    if (config.early_stop && quiet_epochs >= 10) break;
  }
  return result;
}

}  // namespace aurec
