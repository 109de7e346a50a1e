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

#ifndef AUREC_EVALUATION_H_
#define AUREC_EVALUATION_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aurec/backbone.h"
#include "aurec/dataset.h"
#include "aurec/ranking.h"
#include "aurec/uncertainty.h"

namespace aurec {

enum class Protocol { kOverall, kTailAbsolute, kTailRelative };

// "overall", "tail_absolute" or "tail_relative".
Protocol ParseProtocol(std::string_view name);
std::string_view ProtocolName(Protocol protocol);

// |truth ∩ top-k| / |truth|. `truth` must be sorted and non-empty.
double RecallAtK(std::span<const ItemId> ranked,
                 std::span<const ItemId> truth, int k);

// Binary-gain NDCG with log2(rank + 1) discount and the ideal DCG taken
// over min(k, |truth|) positions.
double NdcgAtK(std::span<const ItemId> ranked, std::span<const ItemId> truth,
               int k);

struct EvalReport {
  Protocol protocol = Protocol::kOverall;
  std::vector<int> ks;
  std::vector<double> recall;  // aligned with ks
  std::vector<double> ndcg;
  int num_users_evaluated = 0;
  // Users whose truth under the protocol is empty.
  int num_users_skipped = 0;
};

//  overall:        candidates I \ H_u,    truth T_u
//  tail_absolute:  candidates I \ H_u,    truth T_u ∩ tail
//  tail_relative:  candidates tail \ H_u, truth T_u ∩ tail
// A protocol with no evaluable user yields zero metrics and
// num_users_evaluated == 0.
EvalReport Evaluate(const Scorer& scorer, const InteractionDataset& dataset,
                    const TailPartition& partition, Protocol protocol,
                    std::span<const int> ks, int workers = 1);

// Largest 1-based rank, among items outside `history`, of any truth item.
int CoverageLength(std::span<const double> scores,
                   std::span<const ItemId> history,
                   std::span<const ItemId> truth);

struct CoverageSummary {
  double mean_length = 0.0;
  int num_users = 0;
};

CoverageSummary MeanCoverageLength(const Scorer& scorer,
                                   const InteractionDataset& dataset,
                                   int workers = 1);

struct CalibrationGroup {
  int num_users = 0;
  // Share of tail items in the group's pooled top-k lists; empty when the
  // group has no users.
  std::optional<double> tail_ratio;
};

struct CalibrationReport {
  int k = 0;
  CalibrationGroup tail_focus;  // >= 60% of H_u is tail
  CalibrationGroup head_focus;
};

// Users with an empty history belong to neither group.
bool IsTailFocused(std::span<const ItemId> history,
                   const TailPartition& partition);

CalibrationReport TailRatioCalibration(const Scorer& scorer,
                                       const InteractionDataset& dataset,
                                       const TailPartition& partition, int k,
                                       int workers = 1);

// Pearson correlation; empty when either series has zero variance.
std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y);

// KL(p || q) with p_i = residual_sq_i / sum and q = softmax(logits).
// Empty when every residual is zero.
std::optional<double> ResidualKlDivergence(std::span<const double> residual_sq,
                                           std::span<const double> logits);

struct MeanDiagnostic {
  double mean = 0.0;
  int num_users = 0;
  int num_skipped = 0;
};

// Mean per-user Pearson(r_ui^2, sigma_ui^2) over all items.
MeanDiagnostic CorrelationDiagnostic(const InteractionDataset& dataset,
                                     const FinalEmbeddings& backbone,
                                     const UncertaintyModel& uncertainty,
                                     int workers = 1);

// Mean per-user KL between the residual distribution (r_ui - Y_ui)^2 and
// the normalised exp(s_ui).
MeanDiagnostic KlDiagnostic(const InteractionDataset& dataset,
                            const FinalEmbeddings& backbone,
                            const UncertaintyModel& uncertainty,
                            int workers = 1);

struct DiagnosticsReport {
  MeanDiagnostic correlation;
  MeanDiagnostic kl;
  CoverageSummary coverage;
  CalibrationReport calibration;
};

nlohmann::json ToJson(const EvalReport& report);
nlohmann::json ToJson(const DiagnosticsReport& report);

}  // namespace aurec

#endif  // AUREC_EVALUATION_H_
