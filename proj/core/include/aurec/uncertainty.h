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

#ifndef AUREC_UNCERTAINTY_H_
#define AUREC_UNCERTAINTY_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "aurec/backbone.h"
#include "aurec/dataset.h"
#include "aurec/types.h"

namespace aurec {

// Logits are clamped to [-kLogitClamp, kLogitClamp] wherever they are
// exponentiated.
inline constexpr double kLogitClamp = 30.0;

enum class Activation { kTanh, kIdentity };

Activation ParseActivation(std::string_view name);
std::string_view ActivationName(Activation activation);

// Aleatoric uncertainty estimator. The variance of the label of (u, i) is
// exp(s_ui) / K with s_ui = <p_u, q_i> and
// p_u = act(|H_u|^-1/2 * sum_{j in H_u} z_j).
struct UncertaintyModel {
  double scale_k = 1.0;
  Activation activation = Activation::kTanh;
  Matrix item_table;     // q_i, num_items x D
  Matrix history_table;  // z_j, num_items x D

  int num_items() const { return static_cast<int>(item_table.rows()); }
  int dim() const { return static_cast<int>(item_table.cols()); }
};

// exp(clamp(s)) / k; throws ConfigError if k <= 0.
double VarianceFromLogit(double logit, double k);

// p_u. An empty history yields act(0).
Vector UserRepresentation(const UncertaintyModel& model,
                          std::span<const ItemId> history);

double UncertaintyLogit(const UncertaintyModel& model, const Vector& user_rep,
                        ItemId item);
double UncertaintyVariance(const UncertaintyModel& model,
                           const Vector& user_rep, ItemId item);

// s_u. for every item.
Vector UserLogits(const UncertaintyModel& model,
                  std::span<const ItemId> history);

// One term of the uncertainty objective:
// w * (delta^2 * exp(-s) + beta * s + gamma * s^2).
double UncertaintyTerm(double residual, double logit, double weight,
                       double beta, double gamma);
// Derivative of UncertaintyTerm w.r.t. the logit. The exp part has zero
// slope outside the clamp range.
double UncertaintyTermGrad(double residual, double logit, double weight,
                           double beta, double gamma);

// Mean of UncertaintyTerm over aligned spans. Throws NumericError on
// non-finite input or result.
double UncertaintyLoss(std::span<const double> residuals,
                       std::span<const double> logits,
                       std::span<const double> weights, double beta,
                       double gamma);

struct UncertaintyTrainConfig {
  int dim = 1024;
  double scale_k = 1.0;
  Activation activation = Activation::kTanh;
  double alpha = 1.0;  // weight on positives
  double beta = 1e-2;
  double gamma = 1e-3;
  double learning_rate = 1e-4;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 1;
  // 0 uses every item for each batch user; otherwise that many items are
  // sampled uniformly per user.
  int item_subsample = 0;

  void Validate() const;
};

// Both tables i.i.d. N(0, 0.01^2).
UncertaintyModel InitUncertainty(int num_items,
                                 const UncertaintyTrainConfig& config);

struct UncertaintyGradient {
  Matrix item_table;
  Matrix history_table;
};

// Mean uncertainty objective over users x items with the backbone frozen.
// Positives weigh alpha, everything else 1.
double UncertaintyBatchLoss(const UncertaintyModel& model,
                            const InteractionDataset& dataset,
                            const FinalEmbeddings& backbone,
                            std::span<const UserId> users,
                            const UncertaintyTrainConfig& config,
                            UncertaintyGradient* grad = nullptr,
                            int epoch = 0);

struct UncertaintyTrainResult {
  UncertaintyModel model;
  std::vector<double> loss_trace;
};

// Sequential second stage: Adam on the uncertainty objective with the
// backbone predictions held constant. Throws DivergenceError.
UncertaintyTrainResult TrainUncertainty(const InteractionDataset& dataset,
                                        const FinalEmbeddings& backbone,
                                        const UncertaintyTrainConfig& config);

struct JointGradient {
  BackboneGradient backbone;
  UncertaintyGradient uncertainty;
};

// Joint negative log-likelihood over the plan's terms:
// mean w [ (r - Y)^2 / ((2 / K) e^s) + s / 2 ] + gamma * mean s^2
// + l2 * ||theta||^2.
double JointLoss(const BackboneModel& backbone,
                 const UncertaintyModel& uncertainty,
                 const InteractionDataset& dataset,
                 const NegativeWeightPlan& plan, double l2, double gamma,
                 JointGradient* grad = nullptr);

struct JointTrainResult {
  BackboneModel backbone;
  UncertaintyModel uncertainty;
  std::vector<double> loss_trace;
};

// Trains both estimators together on JointLoss. Sampling, batching and the
// backbone learning rate come from `backbone_config`; table sizes, K, gamma
// and the uncertainty learning rate from `uncertainty_config`.
JointTrainResult TrainJoint(const InteractionDataset& dataset,
                            const BackboneTrainConfig& backbone_config,
                            const UncertaintyTrainConfig& uncertainty_config);

}  // namespace aurec

#endif  // AUREC_UNCERTAINTY_H_
