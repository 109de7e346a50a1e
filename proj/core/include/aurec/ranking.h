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

#ifndef AUREC_RANKING_H_
#define AUREC_RANKING_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "aurec/backbone.h"
#include "aurec/dataset.h"
#include "aurec/types.h"
#include "aurec/uncertainty.h"

namespace aurec {

// lambda * r + (1 - lambda) * sqrt(variance). Throws ConfigError unless
// lambda is in [0, 1].
double BlendedScore(double expectation, double variance, double lambda);

struct RankedList {
  std::vector<ItemId> items;
  std::vector<double> scores;
  // Fewer candidates than requested; the list holds all of them.
  bool truncated = false;
};

// Top-k by (score desc, id asc) over items that are not in `history` (sorted
// ascending) and, when `candidates` is non-empty, have candidates[i] != 0.
// Throws ConfigError if k < 1 and DataError if no candidate remains.
RankedList TopK(std::span<const double> scores, std::span<const ItemId> history,
                int k, std::span<const char> candidates = {});

// Produces a dense score vector per user.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual int num_items() const = 0;
  virtual Vector Score(UserId u) const = 0;
};

// Ranks by the blended score of a backbone and an optional uncertainty
// model. Without an uncertainty model only lambda = 1 is accepted.
class AurScorer : public Scorer {
 public:
  AurScorer(const InteractionDataset& dataset, const FinalEmbeddings& backbone,
            const UncertaintyModel* uncertainty, double lambda);

  int num_items() const override;
  Vector Score(UserId u) const override;

  Vector Expectations(UserId u) const;
  // Requires an uncertainty model.
  Vector Variances(UserId u) const;

  double lambda() const { return lambda_; }

 private:
  const InteractionDataset* dataset_;
  const FinalEmbeddings* backbone_;
  const UncertaintyModel* uncertainty_;
  double lambda_;
};

// All-item rankings for every user with a non-empty candidate set.
std::vector<RankedList> RecommendAll(const Scorer& scorer,
                                     const InteractionDataset& dataset, int k,
                                     int workers = 1);

// TSV rows `user<TAB>rank<TAB>item<TAB>score`, rank 1-based, 6 significant
// digits.
void WriteRecommendations(std::ostream& out,
                          const std::vector<RankedList>& lists);

}  // namespace aurec

#endif  // AUREC_RANKING_H_
