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

#include "aurec/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aurec/errors.h"
#include "aurec/rng.h"

namespace aurec {
namespace {

// Scales the latent inner product before exponentiation; larger values make
// user preferences more peaked.
constexpr double kAffinitySharpness = 1.5;

// Weighted sampling without replacement (Efraimidis-Spirakis): the `count`
// items with the largest log(u) / w keys.
std::vector<int> WeightedSample(std::span<const double> weights, int count,
                                std::mt19937_64& rng) {
  std::vector<std::pair<double, int>> keys(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double u = 1.0 - UniformUnit(rng);  // (0, 1]
    keys[i] = {std::log(u) / weights[i], static_cast<int>(i)};
  }
  std::partial_sort(keys.begin(), keys.begin() + count, keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first ||
                             (a.first == b.first && a.second < b.second);
                    });
  std::vector<int> out(count);
  for (int k = 0; k < count; ++k) out[k] = keys[k].second;
  return out;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (num_users <= 0 || num_items <= 0 || latent_dim <= 0 ||
      interactions_per_user <= 0) {
    throw ConfigError("synthetic counts must be positive");
  }
  if (!(popularity_skew_exponent >= 0.0) ||
      !std::isfinite(popularity_skew_exponent)) {
    throw ConfigError("popularity skew exponent must be finite and >= 0");
  }
  if (!(test_holdout_fraction > 0.0 && test_holdout_fraction < 1.0)) {
    throw ConfigError("test holdout fraction must lie strictly in (0, 1)");
  }
  if (interactions_per_user > num_items) {
    throw ConfigError("interactions per user (" +
                      std::to_string(interactions_per_user) +
                      ") exceed the number of items (" +
                      std::to_string(num_items) + ")");
  }
}

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const int m = spec.num_users;
  const int n = spec.num_items;
  const int k = spec.latent_dim;

  std::mt19937_64 factor_rng(DeriveSeed(spec.seed, {1}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix user_factors(m, k), item_factors(n, k);
  for (Eigen::Index i = 0; i < user_factors.size(); ++i) {
    user_factors.data()[i] = normal(factor_rng);
  }
  for (Eigen::Index i = 0; i < item_factors.size(); ++i) {
    item_factors.data()[i] = normal(factor_rng);
  }

  // Popularity rank of each item is a seeded permutation, so exposure is not
  // tied to item ids.
  std::mt19937_64 rank_rng(DeriveSeed(spec.seed, {2}));
  std::vector<int> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rank_rng);

  GroundTruthAffinity truth;
  truth.exposure.resize(n);
  for (int i = 0; i < n; ++i) {
    truth.exposure[i] = std::pow(rank[i] + 1.0, -spec.popularity_skew_exponent);
  }
  const double scale = kAffinitySharpness / std::sqrt(static_cast<double>(k));
  truth.affinity = ((user_factors * item_factors.transpose()) * scale)
                       .array()
                       .exp()
                       .matrix();

  const int per_user = spec.interactions_per_user;
  int holdout = static_cast<int>(
      std::lround(spec.test_holdout_fraction * per_user));
  holdout = std::clamp(holdout, per_user > 1 ? 1 : 0, per_user - 1);

  std::vector<std::vector<int>> sampled(m);
  std::vector<int> times_sampled(n, 0);
  std::vector<double> weights(n);
  for (int u = 0; u < m; ++u) {
    std::mt19937_64 rng(
        DeriveSeed(spec.seed, {3, static_cast<std::uint64_t>(u)}));
    for (int i = 0; i < n; ++i) {
      weights[i] = truth.affinity(u, i) * truth.exposure[i];
    }
    sampled[u] = WeightedSample(weights, per_user, rng);
    for (int i : sampled[u]) ++times_sampled[i];
  }

  // Hold out preferentially the least exposed of each user's positives, but
  // only items that keep at least one train interaction, so no test item is
  // cold-start.
  std::vector<std::vector<ItemId>> train(m), test(m);
  for (int u = 0; u < m; ++u) {
    std::mt19937_64 rng(
        DeriveSeed(spec.seed, {4, static_cast<std::uint64_t>(u)}));
    std::vector<int> eligible;
    std::vector<double> inverse_exposure;
    for (int j = 0; j < per_user; ++j) {
      const int i = sampled[u][j];
      if (times_sampled[i] >= 2) {
        eligible.push_back(j);
        inverse_exposure.push_back(1.0 / truth.exposure[i]);
      }
    }
    const int count = std::min<int>(holdout, static_cast<int>(eligible.size()));
    std::vector<char> is_held(per_user, 0);
    for (int e : WeightedSample(inverse_exposure, count, rng)) {
      is_held[eligible[e]] = 1;
      --times_sampled[sampled[u][eligible[e]]];
    }
    for (int j = 0; j < per_user; ++j) {
      (is_held[j] ? test[u] : train[u]).push_back(sampled[u][j]);
    }
  }

  SyntheticData out;
  out.dataset =
      InteractionDataset::Create(m, n, std::move(train), std::move(test));
  out.truth = std::move(truth);
  return out;
}

}  // namespace aurec
