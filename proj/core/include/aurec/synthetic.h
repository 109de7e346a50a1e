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

#ifndef AUREC_SYNTHETIC_H_
#define AUREC_SYNTHETIC_H_

#include <cstdint>

#include "aurec/dataset.h"
#include "aurec/types.h"

namespace aurec {

struct SyntheticSpec {
  int num_users = 200;
  int num_items = 500;
  int latent_dim = 8;
  // Exposure of the item at popularity rank k (0-based) is (k + 1)^-skew.
  double popularity_skew_exponent = 1.2;
  int interactions_per_user = 20;
  double test_holdout_fraction = 0.3;
  std::uint64_t seed = 7;

  // Throws ConfigError.
  void Validate() const;
};

// The latent preference structure the interactions were sampled from.
struct GroundTruthAffinity {
  Matrix affinity;               // num_users x num_items, positive
  std::vector<double> exposure;  // per item, max 1
};

struct SyntheticData {
  InteractionDataset dataset;
  GroundTruthAffinity truth;
};

// Samples `interactions_per_user` distinct items per user with probability
// proportional to affinity x exposure, then moves a fraction of them to the
// test set, preferring low-exposure items. Fully determined by the seed.
SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace aurec

#endif  // AUREC_SYNTHETIC_H_
