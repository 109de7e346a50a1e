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

#include "aurec/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aurec/errors.h"
#include "parallel.h"

namespace aurec {
namespace {

bool Contains(std::span<const ItemId> sorted, ItemId i) {
  return std::binary_search(sorted.begin(), sorted.end(), i);
}

std::span<const double> AsSpan(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Averages the per-user slots that are set, in user order.
MeanDiagnostic Summarize(const std::vector<std::optional<double>>& values) {
  MeanDiagnostic out;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++out.num_users;
    } else {
      ++out.num_skipped;
    }
  }
  if (out.num_users > 0) out.mean = sum / out.num_users;
  return out;
}

nlohmann::json GroupJson(const CalibrationGroup& g) {
  nlohmann::json j{{"num_users", g.num_users}};
  j["tail_ratio"] = g.tail_ratio ? nlohmann::json(*g.tail_ratio) : nlohmann::json();
  return j;
}

nlohmann::json MeanJson(const MeanDiagnostic& d) {
  return {{"mean", d.mean},
          {"num_users", d.num_users},
          {"num_skipped", d.num_skipped}};
}

}  // namespace

Protocol ParseProtocol(std::string_view name) {
  if (name == "overall") return Protocol::kOverall;
  if (name == "tail_absolute") return Protocol::kTailAbsolute;
  if (name == "tail_relative") return Protocol::kTailRelative;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

std::string_view ProtocolName(Protocol protocol) {
  switch (protocol) {
    case Protocol::kOverall:
      return "overall";
    case Protocol::kTailAbsolute:
      return "tail_absolute";
    case Protocol::kTailRelative:
      return "tail_relative";
  }
  return "overall";
}

double RecallAtK(std::span<const ItemId> ranked,
                 std::span<const ItemId> truth, int k) {
  if (truth.empty()) throw DataError("recall: empty ground truth");
  const std::size_t depth = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) hits += Contains(truth, ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double NdcgAtK(std::span<const ItemId> ranked, std::span<const ItemId> truth,
               int k) {
  if (truth.empty()) throw DataError("ndcg: empty ground truth");
  const std::size_t depth = std::min(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (Contains(truth, ranked[r])) dcg += 1.0 / std::log2(r + 2.0);
  }
  const std::size_t ideal_len = std::min(truth.size(), static_cast<std::size_t>(k));
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal_len; ++r) idcg += 1.0 / std::log2(r + 2.0);
  return dcg / idcg;
}

EvalReport Evaluate(const Scorer& scorer, const InteractionDataset& dataset,
                    const TailPartition& partition, Protocol protocol,
                    std::span<const int> ks, int workers) {
  if (ks.empty()) throw ConfigError("evaluate: empty K list");
  for (int k : ks) {
    if (k < 1) throw ConfigError("evaluate: K must be >= 1");
  }
  const int max_k = *std::max_element(ks.begin(), ks.end());
  const bool tail_truth = protocol != Protocol::kOverall;
  std::span<const char> candidates;
  if (protocol == Protocol::kTailRelative) candidates = partition.is_tail;

  const std::size_t num_k = ks.size();
  std::vector<char> evaluated(dataset.num_users(), 0);
  std::vector<double> recall(dataset.num_users() * num_k, 0.0);
  std::vector<double> ndcg(dataset.num_users() * num_k, 0.0);

  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    std::vector<ItemId> truth;
    for (ItemId i : dataset.test_items(u)) {
      if (!tail_truth || partition.IsTail(i)) truth.push_back(i);
    }
    if (truth.empty()) return;
    const Vector scores = scorer.Score(u);
    const RankedList list =
        TopK(AsSpan(scores), dataset.train_items(u), max_k, candidates);
    for (std::size_t k = 0; k < num_k; ++k) {
      recall[u * num_k + k] = RecallAtK(list.items, truth, ks[k]);
      ndcg[u * num_k + k] = NdcgAtK(list.items, truth, ks[k]);
    }
    evaluated[u] = 1;
  });

  EvalReport report;
  report.protocol = protocol;
  report.ks.assign(ks.begin(), ks.end());
  report.recall.assign(num_k, 0.0);
  report.ndcg.assign(num_k, 0.0);
  for (int u = 0; u < dataset.num_users(); ++u) {
    if (!evaluated[u]) {
      ++report.num_users_skipped;
      continue;
    }
    ++report.num_users_evaluated;
    for (std::size_t k = 0; k < num_k; ++k) {
      report.recall[k] += recall[u * num_k + k];
      report.ndcg[k] += ndcg[u * num_k + k];
    }
  }
  if (report.num_users_evaluated > 0) {
    for (std::size_t k = 0; k < num_k; ++k) {
      report.recall[k] /= report.num_users_evaluated;
      report.ndcg[k] /= report.num_users_evaluated;
    }
  }
  return report;
}

int CoverageLength(std::span<const double> scores,
                   std::span<const ItemId> history,
                   std::span<const ItemId> truth) {
  if (truth.empty()) throw DataError("coverage length: empty ground truth");
  int worst = 0;
  for (ItemId t : truth) {
    if (Contains(history, t)) {
      throw DataError("coverage length: truth item is in the history");
    }
    // 1 + number of candidates ranked strictly ahead of t.
    int rank = 1;
    for (ItemId j = 0; j < static_cast<ItemId>(scores.size()); ++j) {
      if (j == t || Contains(history, j)) continue;
      if (scores[j] > scores[t] || (scores[j] == scores[t] && j < t)) ++rank;
    }
    worst = std::max(worst, rank);
  }
  return worst;
}

CoverageSummary MeanCoverageLength(const Scorer& scorer,
                                   const InteractionDataset& dataset,
                                   int workers) {
  std::vector<int> lengths(dataset.num_users(), 0);
  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    if (dataset.test_items(u).empty()) return;
    const Vector scores = scorer.Score(u);
    lengths[u] =
        CoverageLength(AsSpan(scores), dataset.train_items(u), dataset.test_items(u));
  });
  CoverageSummary out;
  double sum = 0.0;
  for (int len : lengths) {
    if (len == 0) continue;
    sum += len;
    ++out.num_users;
  }
  if (out.num_users > 0) out.mean_length = sum / out.num_users;
  return out;
}

bool IsTailFocused(std::span<const ItemId> history,
                   const TailPartition& partition) {
  if (history.empty()) return false;
  std::size_t tail = 0;
  for (ItemId i : history) tail += partition.IsTail(i);
  // tail / |H| >= 0.6 without rounding.
  return 5 * tail >= 3 * history.size();
}

CalibrationReport TailRatioCalibration(const Scorer& scorer,
                                       const InteractionDataset& dataset,
                                       const TailPartition& partition, int k,
                                       int workers) {
  if (k < 1) throw ConfigError("calibration: K must be >= 1");
  // Per user: (tail items, list length).
  std::vector<std::pair<int, int>> counts(dataset.num_users(), {0, 0});
  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    auto history = dataset.train_items(u);
    if (history.empty() ||
        static_cast<int>(history.size()) >= dataset.num_items()) {
      return;
    }
    const Vector scores = scorer.Score(u);
    const RankedList list = TopK(AsSpan(scores), history, k);
    int tail = 0;
    for (ItemId i : list.items) tail += partition.IsTail(i);
    counts[u] = {tail, static_cast<int>(list.items.size())};
  });

  CalibrationReport report;
  report.k = k;
  long long tail_hits[2] = {0, 0}, totals[2] = {0, 0};
  for (int u = 0; u < dataset.num_users(); ++u) {
    if (counts[u].second == 0) continue;
    const int g = IsTailFocused(dataset.train_items(u), partition) ? 0 : 1;
    CalibrationGroup& group = g == 0 ? report.tail_focus : report.head_focus;
    ++group.num_users;
    tail_hits[g] += counts[u].first;
    totals[g] += counts[u].second;
  }
  for (int g = 0; g < 2; ++g) {
    CalibrationGroup& group = g == 0 ? report.tail_focus : report.head_focus;
    if (group.num_users > 0) {
      group.tail_ratio =
          static_cast<double>(tail_hits[g]) / static_cast<double>(totals[g]);
    }
  }
  return report;
}

std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("pearson: size mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> ResidualKlDivergence(std::span<const double> residual_sq,
                                           std::span<const double> logits) {
  if (residual_sq.size() != logits.size()) {
    throw ConfigError("kl: size mismatch");
  }
  const double total = std::accumulate(residual_sq.begin(), residual_sq.end(), 0.0);
  if (!(total > 0.0)) return std::nullopt;
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double s : logits) z += std::exp(s - max_logit);
  const double log_norm = max_logit + std::log(z);
  double kl = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (residual_sq[i] <= 0.0) continue;
    const double p = residual_sq[i] / total;
    kl += p * (std::log(p) - (logits[i] - log_norm));
  }
  return std::max(0.0, kl);
}

MeanDiagnostic CorrelationDiagnostic(const InteractionDataset& dataset,
                                     const FinalEmbeddings& backbone,
                                     const UncertaintyModel& uncertainty,
                                     int workers) {
  std::vector<std::optional<double>> values(dataset.num_users());
  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    const Vector r = backbone.ScoreUser(u);
    const Vector s = UserLogits(uncertainty, dataset.train_items(u));
    std::vector<double> r_sq(r.size()), var(s.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      r_sq[i] = r[i] * r[i];
      var[i] = VarianceFromLogit(s[i], uncertainty.scale_k);
    }
    values[u] = PearsonCorrelation(r_sq, var);
  });
  MeanDiagnostic out = Summarize(values);
  if (out.num_users == 0) {
    throw DataError("correlation diagnostic: every user has a constant series");
  }
  return out;
}

MeanDiagnostic KlDiagnostic(const InteractionDataset& dataset,
                            const FinalEmbeddings& backbone,
                            const UncertaintyModel& uncertainty, int workers) {
  std::vector<std::optional<double>> values(dataset.num_users());
  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    const Vector r = backbone.ScoreUser(u);
    const Vector s = UserLogits(uncertainty, dataset.train_items(u));
    std::vector<double> residual_sq(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) residual_sq[i] = r[i] * r[i];
    for (ItemId i : dataset.train_items(u)) {
      residual_sq[i] = (r[i] - 1.0) * (r[i] - 1.0);
    }
    values[u] = ResidualKlDivergence(residual_sq, AsSpan(s));
  });
  MeanDiagnostic out = Summarize(values);
  if (out.num_users == 0) {
    throw DataError("kl diagnostic: every user has zero residuals");
  }
  return out;
}

nlohmann::json ToJson(const EvalReport& report) {
  return {{"protocol", ProtocolName(report.protocol)},
          {"k", report.ks},
          {"recall", report.recall},
          {"ndcg", report.ndcg},
          {"num_users", report.num_users_evaluated},
          {"num_users_skipped", report.num_users_skipped}};
}

nlohmann::json ToJson(const DiagnosticsReport& report) {
  return {{"correlation", MeanJson(report.correlation)},
          {"kl", MeanJson(report.kl)},
          {"coverage_length",
           {{"mean", report.coverage.mean_length},
            {"num_users", report.coverage.num_users}}},
          {"calibration",
           {{"k", report.calibration.k},
            {"tail_focus", GroupJson(report.calibration.tail_focus)},
            {"head_focus", GroupJson(report.calibration.head_focus)}}}};
}

}  // namespace aurec
