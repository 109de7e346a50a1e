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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "aurec/errors.h"
#include "aurec/ranking.h"
#include "test_util.h"

namespace aurec {
namespace {

TEST(BlendedScore, Degenerate) {
  EXPECT_EQ(BlendedScore(0.7, 0.09, 1.0), 0.7);
  EXPECT_EQ(BlendedScore(0.7, 0.09, 0.0), 0.3);
  EXPECT_DOUBLE_EQ(BlendedScore(0.7, 0.09, 0.5), 0.5);
  EXPECT_THROW(BlendedScore(0.7, 0.09, 1.1), ConfigError);
  EXPECT_THROW(BlendedScore(0.7, 0.09, -0.1), ConfigError);
}

// Published case study: one user, four items.
TEST(BlendedScore, CaseStudyOrdering) {
  const double expectation[] = {0.8038, 0.7784, 0.7654, 0.4648};
  const double uncertainty[] = {0.3188, 0.2952, 0.3050, 0.3277};
  std::vector<double> by_uncertainty, by_expectation;
  for (int i = 0; i < 4; ++i) {
    const double variance = uncertainty[i] * uncertainty[i];
    by_uncertainty.push_back(BlendedScore(expectation[i], variance, 0.0));
    by_expectation.push_back(BlendedScore(expectation[i], variance, 1.0));
  }
  EXPECT_EQ(TopK(by_uncertainty, {}, 4).items, (std::vector<ItemId>{3, 0, 2, 1}));
  EXPECT_EQ(TopK(by_expectation, {}, 4).items, (std::vector<ItemId>{0, 1, 2, 3}));
}

TEST(TopK, FullRankingWhenKEqualsCandidates) {
  const std::vector<double> s{0.1, 0.5, 0.3, 0.9};
  const std::vector<ItemId> h{1};
  const auto list = TopK(s, h, 3);
  EXPECT_EQ(list.items, (std::vector<ItemId>{3, 2, 0}));
  EXPECT_EQ(list.scores, (std::vector<double>{0.9, 0.3, 0.1}));
  EXPECT_FALSE(list.truncated);
}

TEST(TopK, TiesGoToLowerId) {
  const std::vector<double> s{0.5, 0.7, 0.5, 0.7};
  EXPECT_EQ(TopK(s, {}, 4).items, (std::vector<ItemId>{1, 3, 0, 2}));
}

TEST(TopK, ShortListIsFlagged) {
  const std::vector<double> s{0.1, 0.2, 0.3};
  const std::vector<ItemId> h{0};
  const auto list = TopK(s, h, 5);
  EXPECT_EQ(list.items, (std::vector<ItemId>{2, 1}));
  EXPECT_TRUE(list.truncated);
}

TEST(TopK, Errors) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<ItemId> all{0, 1};
  EXPECT_THROW(TopK(s, {}, 0), ConfigError);
  EXPECT_THROW(TopK(s, all, 1), DataError);
  const std::vector<char> none{0, 0};
  EXPECT_THROW(TopK(s, {}, 1, none), DataError);
}

TEST(TopK, MatchesBruteForceSort) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 6 + trial % 7;
    std::vector<double> s(n);
    for (auto& v : s) v = trial % 2 ? coarse(rng) * 0.25 : UniformUnit(rng);
    std::vector<ItemId> h;
    for (int i = 0; i < n; ++i) {
      if (UniformUnit(rng) < 0.3) h.push_back(i);
    }
    std::vector<char> mask;
    if (trial % 3 == 0) {
      for (int i = 0; i < n; ++i) mask.push_back(UniformUnit(rng) < 0.6);
    }
    const auto oracle = testing::BruteForceRanking(s, h, mask);
    if (oracle.empty()) continue;
    const int k = 1 + trial % 5;
    const auto list = TopK(s, h, k, mask);
    const std::vector<ItemId> expect(
        oracle.begin(), oracle.begin() + std::min<std::size_t>(k, oracle.size()));
    EXPECT_EQ(list.items, expect) << "trial " << trial;
    EXPECT_EQ(list.truncated, static_cast<int>(oracle.size()) < k);
  }
}

struct Fixture {
  InteractionDataset ds;
  FinalEmbeddings emb;
  UncertaintyModel unc;
};

Fixture MakeFixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Fixture f;
  f.ds = testing::RandomDataset(8, 15, 0.25, 0.15, seed);
  f.emb = {testing::RandomMatrix(8, 3, 0.6, rng), testing::RandomMatrix(15, 3, 0.6, rng)};
  f.unc.scale_k = 1.0;
  f.unc.item_table = testing::RandomMatrix(15, 5, 0.5, rng);
  f.unc.history_table = testing::RandomMatrix(15, 5, 0.5, rng);
  return f;
}

TEST(AurScorer, LambdaOneIsExpectationRanking) {
  const auto f = MakeFixture(1);
  const AurScorer blended(f.ds, f.emb, &f.unc, 1.0);
  const AurScorer bare(f.ds, f.emb, nullptr, 1.0);
  for (int u = 0; u < 8; ++u) {
    const Vector a = blended.Score(u), b = bare.Score(u), r = f.emb.ScoreUser(u);
    EXPECT_TRUE(a == r);
    EXPECT_TRUE(b == r);
  }
  EXPECT_THROW(AurScorer(f.ds, f.emb, nullptr, 0.5), ConfigError);
}

TEST(AurScorer, ScoreIsBlend) {
  const auto f = MakeFixture(2);
  const AurScorer scorer(f.ds, f.emb, &f.unc, 0.3);
  const Vector r = scorer.Expectations(4), v = scorer.Variances(4), s = scorer.Score(4);
  for (int i = 0; i < 15; ++i) EXPECT_EQ(s[i], BlendedScore(r[i], v[i], 0.3));
}

int RankOf(const Vector& scores, std::span<const ItemId> history, ItemId item) {
  const auto list = TopK({scores.data(), static_cast<std::size_t>(scores.size())},
                         history, static_cast<int>(scores.size()));
  return static_cast<int>(std::find(list.items.begin(), list.items.end(), item) -
                          list.items.begin());
}

TEST(AurScorer, RaisingLogitNeverDemotes) {
  for (int trial = 0; trial < 30; ++trial) {
    auto f = MakeFixture(100 + trial);
    const UserId u = trial % 8;
    const ItemId item = trial % 15;
    if (f.ds.InTrain(u, item)) continue;
    const double lambda = 0.1 * (trial % 10);
    const Vector before = AurScorer(f.ds, f.emb, &f.unc, lambda).Score(u);
    // s_ui += |p_u|^2 while every other logit stays put.
    const Vector p = UserRepresentation(f.unc, f.ds.train_items(u));
    f.unc.item_table.row(item) += p.transpose();
    const Vector after = AurScorer(f.ds, f.emb, &f.unc, lambda).Score(u);
    EXPECT_LE(RankOf(after, f.ds.train_items(u), item),
              RankOf(before, f.ds.train_items(u), item));
  }
}

TEST(AurScorer, UncertaintyRankingIgnoresScale) {
  auto f = MakeFixture(3);
  for (int u = 0; u < 8; ++u) {
    f.unc.scale_k = 1.0;
    const Vector a = AurScorer(f.ds, f.emb, &f.unc, 0.0).Score(u);
    f.unc.scale_k = 37.5;
    const Vector b = AurScorer(f.ds, f.emb, &f.unc, 0.0).Score(u);
    const auto h = f.ds.train_items(u);
    EXPECT_EQ(TopK({a.data(), 15}, h, 10).items, TopK({b.data(), 15}, h, 10).items);
  }
}

TEST(RecommendAll, NeverRecommendsHistory) {
  const auto f = MakeFixture(4);
  const AurScorer scorer(f.ds, f.emb, &f.unc, 0.6);
  for (int workers : {1, 3}) {
    const auto lists = RecommendAll(scorer, f.ds, 5, workers);
    ASSERT_EQ(lists.size(), 8u);
    for (int u = 0; u < 8; ++u) {
      for (ItemId i : lists[u].items) EXPECT_FALSE(f.ds.InTrain(u, i));
      for (std::size_t j = 1; j < lists[u].scores.size(); ++j) {
        EXPECT_GE(lists[u].scores[j - 1], lists[u].scores[j]);
      }
    }
  }
}

TEST(WriteRecommendations, TsvLayout) {
  RankedList a;
  a.items = {4, 1};
  a.scores = {0.123456789, -2.0};
  RankedList b;
  b.items = {0};
  b.scores = {1234567.0};
  std::ostringstream out;
  WriteRecommendations(out, {a, b});
  EXPECT_EQ(out.str(), "0\t1\t4\t0.123457\n0\t2\t1\t-2\n1\t1\t0\t1.23457e+06\n");
}

}  // namespace
}  // namespace aurec
