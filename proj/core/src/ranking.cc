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

#include "aurec/ranking.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "aurec/errors.h"
#include "parallel.h"

namespace aurec {

double BlendedScore(double expectation, double variance, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("blend lambda must lie in [0, 1], got " +
                      std::to_string(lambda));
  }
  return lambda * expectation + (1.0 - lambda) * std::sqrt(variance);
}

RankedList TopK(std::span<const double> scores, std::span<const ItemId> history,
                int k, std::span<const char> candidates) {
  if (k < 1) throw ConfigError("top-k needs k >= 1");
  const ItemId n = static_cast<ItemId>(scores.size());
  std::vector<ItemId> pool;
  pool.reserve(scores.size());
  auto next = history.begin();
  for (ItemId i = 0; i < n; ++i) {
    while (next != history.end() && *next < i) ++next;
    if (next != history.end() && *next == i) continue;
    if (!candidates.empty() && !candidates[i]) continue;
    pool.push_back(i);
  }
  if (pool.empty()) throw DataError("top-k: no candidate items");

  RankedList out;
  std::size_t take = static_cast<std::size_t>(k);
  if (take > pool.size()) {
    take = pool.size();
    out.truncated = true;
  }
  auto before = [&](ItemId a, ItemId b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(pool.begin(), pool.begin() + take, pool.end(), before);
  out.items.assign(pool.begin(), pool.begin() + take);
  out.scores.reserve(take);
  for (ItemId i : out.items) out.scores.push_back(scores[i]);
  return out;
}

AurScorer::AurScorer(const InteractionDataset& dataset,
                     const FinalEmbeddings& backbone,
                     const UncertaintyModel* uncertainty, double lambda)
    : dataset_(&dataset),
      backbone_(&backbone),
      uncertainty_(uncertainty),
      lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("blend lambda must lie in [0, 1], got " +
                      std::to_string(lambda));
  }
  if (uncertainty == nullptr && lambda != 1.0) {
    throw ConfigError("lambda < 1 requires an uncertainty model");
  }
  if (backbone.items.rows() != dataset.num_items() ||
      backbone.users.rows() != dataset.num_users()) {
    throw DataError("backbone does not match the dataset dimensions");
  }
  if (uncertainty != nullptr && uncertainty->num_items() != dataset.num_items()) {
    throw DataError("uncertainty model does not match the dataset dimensions");
  }
}

int AurScorer::num_items() const { return dataset_->num_items(); }

Vector AurScorer::Expectations(UserId u) const {
  return backbone_->ScoreUser(u);
}

Vector AurScorer::Variances(UserId u) const {
  if (uncertainty_ == nullptr) throw ConfigError("no uncertainty model");
  Vector s = UserLogits(*uncertainty_, dataset_->train_items(u));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s[i] = VarianceFromLogit(s[i], uncertainty_->scale_k);
  }
  return s;
}

Vector AurScorer::Score(UserId u) const {
  Vector r = Expectations(u);
  if (uncertainty_ == nullptr) return r;
  const Vector var = Variances(u);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r[i] = BlendedScore(r[i], var[i], lambda_);
  }
  return r;
}

std::vector<RankedList> RecommendAll(const Scorer& scorer,
                                     const InteractionDataset& dataset, int k,
                                     int workers) {
  std::vector<RankedList> lists(dataset.num_users());
  internal::ParallelFor(dataset.num_users(), workers, [&](int u) {
    auto history = dataset.train_items(u);
    if (static_cast<int>(history.size()) >= dataset.num_items()) return;
    const Vector scores = scorer.Score(u);
    lists[u] = TopK({scores.data(), static_cast<std::size_t>(scores.size())},
                    history, k);
  });
  return lists;
}

void WriteRecommendations(std::ostream& out,
                          const std::vector<RankedList>& lists) {
  char buf[64];
  for (std::size_t u = 0; u < lists.size(); ++u) {
    for (std::size_t r = 0; r < lists[u].items.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.6g", lists[u].scores[r]);
      out << u << '\t' << (r + 1) << '\t' << lists[u].items[r] << '\t' << buf
          << '\n';
    }
  }
}

}  // namespace aurec
