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

#include "aurec/uncertainty.h"

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

constexpr std::uint64_t kInitStream = 21;
constexpr std::uint64_t kSubsampleStream = 22;
constexpr std::uint64_t kJointNegativeStream = 23;

double Clamp(double s) { return std::clamp(s, -kLogitClamp, kLogitClamp); }
bool InsideClamp(double s) { return s >= -kLogitClamp && s <= kLogitClamp; }

// Pre-activation h_u = |H_u|^-1/2 sum z_j.
Vector HistorySum(const UncertaintyModel& model,
                  std::span<const ItemId> history) {
  Vector h = Vector::Zero(model.dim());
  if (history.empty()) return h;
  for (ItemId j : history) h += model.history_table.row(j).transpose();
  h /= std::sqrt(static_cast<double>(history.size()));
  return h;
}

Vector Activate(Activation activation, const Vector& h) {
  if (activation == Activation::kIdentity) return h;
  return h.array().tanh().matrix();
}

// d act / d h, expressed through the activated value.
Vector ActivationSlope(Activation activation, const Vector& activated) {
  if (activation == Activation::kIdentity) {
    return Vector::Ones(activated.size());
  }
  return (1.0 - activated.array().square()).matrix();
}

// Adds the contribution of dL/dp_u to the history table gradient.
void BackpropUserRep(const UncertaintyModel& model,
                     std::span<const ItemId> history, const Vector& p,
                     const Vector& grad_p, Matrix& grad_history) {
  if (history.empty()) return;
  const Vector grad_h =
      (grad_p.array() * ActivationSlope(model.activation, p).array()).matrix() /
      std::sqrt(static_cast<double>(history.size()));
  for (ItemId j : history) grad_history.row(j) += grad_h.transpose();
}

std::span<double> Flat(Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

Activation ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) +
                    "' (expected tanh or identity)");
}

std::string_view ActivationName(Activation activation) {
  return activation == Activation::kIdentity ? "identity" : "tanh";
}

double VarianceFromLogit(double logit, double k) {
  if (!(k > 0.0)) throw ConfigError("uncertainty scale K must be positive");
  return std::exp(Clamp(logit)) / k;
}

Vector UserRepresentation(const UncertaintyModel& model,
                          std::span<const ItemId> history) {
  return Activate(model.activation, HistorySum(model, history));
}

double UncertaintyLogit(const UncertaintyModel& model, const Vector& user_rep,
                        ItemId item) {
  return model.item_table.row(item).dot(user_rep);
}

double UncertaintyVariance(const UncertaintyModel& model,
                           const Vector& user_rep, ItemId item) {
  return VarianceFromLogit(UncertaintyLogit(model, user_rep, item),
                           model.scale_k);
}

Vector UserLogits(const UncertaintyModel& model,
                  std::span<const ItemId> history) {
  return model.item_table * UserRepresentation(model, history);
}

double UncertaintyTerm(double residual, double logit, double weight,
                       double beta, double gamma) {
  return weight * (residual * residual * std::exp(-Clamp(logit)) +
                   beta * logit + gamma * logit * logit);
}

double UncertaintyTermGrad(double residual, double logit, double weight,
                           double beta, double gamma) {
  const double data_slope =
      InsideClamp(logit) ? -residual * residual * std::exp(-logit) : 0.0;
  return weight * (data_slope + beta + 2.0 * gamma * logit);
}

double UncertaintyLoss(std::span<const double> residuals,
                       std::span<const double> logits,
                       std::span<const double> weights, double beta,
                       double gamma) {
  if (residuals.size() != logits.size() || residuals.size() != weights.size()) {
    throw ConfigError("uncertainty loss: input sizes differ");
  }
  if (residuals.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (!std::isfinite(residuals[k]) || !std::isfinite(logits[k]) ||
        !std::isfinite(weights[k])) {
      throw NumericError("uncertainty loss: non-finite input at term " +
                         std::to_string(k));
    }
    sum += UncertaintyTerm(residuals[k], logits[k], weights[k], beta, gamma);
  }
  const double mean = sum / static_cast<double>(residuals.size());
  if (!std::isfinite(mean)) throw NumericError("uncertainty loss overflowed");
  return mean;
}

void UncertaintyTrainConfig::Validate() const {
  if (dim < 1) throw ConfigError("uncertainty dim must be >= 1");
  if (!(scale_k > 0.0)) throw ConfigError("uncertainty scale K must be > 0");
  if (!(alpha >= 1.0)) throw ConfigError("alpha must be >= 1");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (item_subsample < 0) throw ConfigError("item subsample must be >= 0");
  AdamOptions{learning_rate}.Validate();
}

UncertaintyModel InitUncertainty(int num_items,
                                 const UncertaintyTrainConfig& config) {
  config.Validate();
  UncertaintyModel model;
  model.scale_k = config.scale_k;
  model.activation = config.activation;
  model.item_table.resize(num_items, config.dim);
  model.history_table.resize(num_items, config.dim);
  std::mt19937_64 rng(DeriveSeed(config.seed, {kInitStream}));
  std::normal_distribution<double> normal(0.0, 0.01);
  for (Matrix* table : {&model.item_table, &model.history_table}) {
    for (Eigen::Index k = 0; k < table->size(); ++k) {
      table->data()[k] = normal(rng);
    }
  }
  return model;
}

double UncertaintyBatchLoss(const UncertaintyModel& model,
                            const InteractionDataset& dataset,
                            const FinalEmbeddings& backbone,
                            std::span<const UserId> users,
                            const UncertaintyTrainConfig& config,
                            UncertaintyGradient* grad, int epoch) {
  const int n = dataset.num_items();
  const int per_user = config.item_subsample > 0
                           ? std::min(config.item_subsample, n)
                           : n;
  const double num_terms =
      static_cast<double>(per_user) * static_cast<double>(users.size());
  if (num_terms == 0.0) return 0.0;

  if (grad) {
    grad->item_table = Matrix::Zero(model.item_table.rows(), model.dim());
    grad->history_table = Matrix::Zero(model.history_table.rows(), model.dim());
  }

  std::vector<ItemId> items(n);
  std::vector<char> positive(n);
  double total = 0.0;
  for (UserId u : users) {
    auto history = dataset.train_items(u);
    std::fill(positive.begin(), positive.end(), 0);
    for (ItemId i : history) positive[i] = 1;

    std::iota(items.begin(), items.end(), 0);
    if (per_user < n) {
      std::mt19937_64 rng(DeriveSeed(
          config.seed, {kSubsampleStream, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(u)}));
      for (int k = 0; k < per_user; ++k) {
        std::uniform_int_distribution<int> pick(k, n - 1);
        std::swap(items[k], items[pick(rng)]);
      }
    }

    const Vector p = UserRepresentation(model, history);
    const Vector r = backbone.ScoreUser(u);
    Vector grad_p;
    if (grad) grad_p = Vector::Zero(model.dim());
    for (int k = 0; k < per_user; ++k) {
      const ItemId i = items[k];
      const double s = model.item_table.row(i).dot(p);
      const double y = positive[i] ? 1.0 : 0.0;
      const double w = positive[i] ? config.alpha : 1.0;
      const double residual = r[i] - y;
      total += UncertaintyTerm(residual, s, w, config.beta, config.gamma);
      if (grad) {
        const double g =
            UncertaintyTermGrad(residual, s, w, config.beta, config.gamma) /
            num_terms;
        grad->item_table.row(i) += g * p.transpose();
        grad_p += g * model.item_table.row(i).transpose();
      }
    }
    if (grad) BackpropUserRep(model, history, p, grad_p, grad->history_table);
  }
  const double loss = total / num_terms;
  if (!std::isfinite(loss)) throw NumericError("uncertainty loss is non-finite");
  return loss;
}

UncertaintyTrainResult TrainUncertainty(const InteractionDataset& dataset,
                                        const FinalEmbeddings& backbone,
                                        const UncertaintyTrainConfig& config) {
  config.Validate();
  if (backbone.users.rows() != dataset.num_users() ||
      backbone.items.rows() != dataset.num_items()) {
    throw DataError("backbone embeddings do not match the dataset");
  }
  UncertaintyTrainResult result;
  result.model = InitUncertainty(dataset.num_items(), config);
  UncertaintyModel& model = result.model;

  const AdamOptions adam{config.learning_rate};
  AdamState item_state(model.item_table.size(), adam);
  AdamState history_state(model.history_table.size(), adam);

  UncertaintyGradient grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    auto batches = MakeUserBatches(dataset.num_users(), config.batch_size,
                                   config.seed, epoch);
    for (const auto& batch : batches) {
      try {
        epoch_loss += UncertaintyBatchLoss(model, dataset, backbone, batch,
                                           config, &grad, epoch);
        item_state.Step(Flat(model.item_table), Flat(grad.item_table));
        history_state.Step(Flat(model.history_table),
                           Flat(grad.history_table));
      } catch (const NumericError&) {
        throw DivergenceError("uncertainty training", epoch);
      }
    }
    result.loss_trace.push_back(
        epoch_loss / static_cast<double>(std::max<std::size_t>(1, batches.size())));
  }
  return result;
}

double JointLoss(const BackboneModel& backbone,
                 const UncertaintyModel& uncertainty,
                 const InteractionDataset& dataset,
                 const NegativeWeightPlan& plan, double l2, double gamma,
                 JointGradient* grad) {
  const double k = uncertainty.scale_k;
  if (!(k > 0.0)) throw ConfigError("uncertainty scale K must be positive");
  const FinalEmbeddings final_emb = Propagate(backbone);

  std::size_t count = 0;
  for (std::size_t b = 0; b < plan.users.size(); ++b) {
    count += dataset.train_items(plan.users[b]).size() +
             plan.negatives[b].size();
  }
  const double inv_terms = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;

  Matrix grad_users, grad_items;
  if (grad) {
    grad_users = Matrix::Zero(final_emb.users.rows(), final_emb.users.cols());
    grad_items = Matrix::Zero(final_emb.items.rows(), final_emb.items.cols());
    grad->uncertainty.item_table =
        Matrix::Zero(uncertainty.item_table.rows(), uncertainty.dim());
    grad->uncertainty.history_table =
        Matrix::Zero(uncertainty.history_table.rows(), uncertainty.dim());
  }

  double total = 0.0;
  for (std::size_t b = 0; b < plan.users.size(); ++b) {
    const UserId u = plan.users[b];
    auto history = dataset.train_items(u);
    const Vector p = UserRepresentation(uncertainty, history);
    Vector grad_p;
    if (grad) grad_p = Vector::Zero(uncertainty.dim());

    auto term = [&](ItemId i, double label) {
      const double r = final_emb.Predict(u, i);
      const double s = uncertainty.item_table.row(i).dot(p);
      if (!std::isfinite(r) || !std::isfinite(s)) {
        throw NumericError("non-finite joint term for (user " +
                           std::to_string(u) + ", item " + std::to_string(i) +
                           ")");
      }
      const double diff = r - label;
      const double inv_var = k * std::exp(-Clamp(s));
      total += 0.5 * diff * diff * inv_var + 0.5 * s + gamma * s * s;
      if (grad) {
        const double dr = diff * inv_var * inv_terms;
        const double data_slope =
            InsideClamp(s) ? -0.5 * diff * diff * inv_var : 0.0;
        const double ds = (data_slope + 0.5 + 2.0 * gamma * s) * inv_terms;
        grad_users.row(u) += dr * final_emb.items.row(i);
        grad_items.row(i) += dr * final_emb.users.row(u);
        grad->uncertainty.item_table.row(i) += ds * p.transpose();
        grad_p += ds * uncertainty.item_table.row(i).transpose();
      }
    };
    for (ItemId i : history) term(i, 1.0);
    for (ItemId i : plan.negatives[b]) term(i, 0.0);
    if (grad) {
      BackpropUserRep(uncertainty, history, p, grad_p,
                      grad->uncertainty.history_table);
    }
  }

  if (grad) {
    BackpropagateEmbeddings(backbone, grad_users, grad_items);
    grad_users += (2.0 * l2) * backbone.user_embeddings;
    grad_items += (2.0 * l2) * backbone.item_embeddings;
    grad->backbone.users = std::move(grad_users);
    grad->backbone.items = std::move(grad_items);
  }
  return total * inv_terms + l2 * backbone.SquaredNorm();
}

JointTrainResult TrainJoint(const InteractionDataset& dataset,
                            const BackboneTrainConfig& backbone_config,
                            const UncertaintyTrainConfig& uncertainty_config) {
  backbone_config.Validate();
  uncertainty_config.Validate();
  JointTrainResult result;
  result.backbone =
      InitBackbone(backbone_config.kind, dataset, backbone_config.dim,
                   backbone_config.num_layers, backbone_config.seed);
  result.uncertainty = InitUncertainty(dataset.num_items(), uncertainty_config);
  BackboneModel& backbone = result.backbone;
  UncertaintyModel& uncertainty = result.uncertainty;

  const AdamOptions backbone_adam{backbone_config.learning_rate};
  const AdamOptions uncertainty_adam{uncertainty_config.learning_rate};
  AdamState user_state(backbone.user_embeddings.size(), backbone_adam);
  AdamState item_state(backbone.item_embeddings.size(), backbone_adam);
  AdamState q_state(uncertainty.item_table.size(), uncertainty_adam);
  AdamState z_state(uncertainty.history_table.size(), uncertainty_adam);
  const std::uint64_t negative_seed =
      DeriveSeed(backbone_config.seed, {kJointNegativeStream});

  JointGradient grad;
  for (int epoch = 0; epoch < backbone_config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    auto batches = MakeUserBatches(dataset.num_users(),
                                   backbone_config.batch_size,
                                   backbone_config.seed, epoch);
    for (const auto& batch : batches) {
      NegativeWeightPlan plan =
          SampleNegativeWeights(dataset, batch, backbone_config.negative_rate,
                                negative_seed, epoch);
      try {
        const double loss =
            JointLoss(backbone, uncertainty, dataset, plan, backbone_config.l2,
                      uncertainty_config.gamma, &grad);
        if (!std::isfinite(loss)) throw NumericError("non-finite loss");
        epoch_loss += loss;
        user_state.Step(Flat(backbone.user_embeddings),
                        Flat(grad.backbone.users));
        item_state.Step(Flat(backbone.item_embeddings),
                        Flat(grad.backbone.items));
        q_state.Step(Flat(uncertainty.item_table),
                     Flat(grad.uncertainty.item_table));
        z_state.Step(Flat(uncertainty.history_table),
                     Flat(grad.uncertainty.history_table));
      } catch (const NumericError&) {
        throw DivergenceError("joint training", epoch);
      }
    }
    result.loss_trace.push_back(
        epoch_loss / static_cast<double>(std::max<std::size_t>(1, batches.size())));
  }
  return result;
}

}  // namespace aurec
