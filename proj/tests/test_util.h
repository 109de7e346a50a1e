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

#ifndef AUREC_TESTS_TEST_UTIL_H_
#define AUREC_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "aurec/dataset.h"
#include "aurec/ranking.h"
#include "aurec/rng.h"
#include "aurec/types.h"

namespace aurec::testing {

// Each (u, i) lands in train with probability `train_p`, otherwise in test
// with probability `test_p`.
inline InteractionDataset RandomDataset(int m, int n, double train_p,
                                        double test_p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<ItemId>> train(m), test(m);
  for (int u = 0; u < m; ++u) {
    for (int i = 0; i < n; ++i) {
      const double x = UniformUnit(rng);
      if (x < train_p) {
        train[u].push_back(i);
      } else if (x < train_p + test_p) {
        test[u].push_back(i);
      }
    }
  }
  return InteractionDataset::Create(m, n, std::move(train), std::move(test));
}

inline Matrix RandomMatrix(int rows, int cols, double scale,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = normal(rng);
  }
  return out;
}

// Row-major concatenation of several matrices.
inline std::vector<double> Flatten(std::initializer_list<const Matrix*> mats) {
  std::vector<double> out;
  for (const Matrix* m : mats) {
    out.insert(out.end(), m->data(), m->data() + m->size());
  }
  return out;
}

inline void Unflatten(std::span<const double> flat,
                      std::initializer_list<Matrix*> mats) {
  std::size_t offset = 0;
  for (Matrix* m : mats) {
    std::copy_n(flat.begin() + offset, m->size(), m->data());
    offset += m->size();
  }
}

// Serves a fixed score matrix.
class MatrixScorer : public Scorer {
 public:
  explicit MatrixScorer(Matrix scores) : scores_(std::move(scores)) {}
  int num_items() const override { return static_cast<int>(scores_.cols()); }
  Vector Score(UserId u) const override { return scores_.row(u).transpose(); }

 private:
  Matrix scores_;
};

// Full sort by (score desc, id asc) of the allowed items.
inline std::vector<ItemId> BruteForceRanking(std::span<const double> scores,
                                             std::span<const ItemId> history,
                                             const std::vector<char>& allowed) {
  std::vector<ItemId> items;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (std::find(history.begin(), history.end(), i) != history.end()) continue;
    if (!allowed.empty() && !allowed[i]) continue;
    items.push_back(i);
  }
  std::sort(items.begin(), items.end(), [&](ItemId a, ItemId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return items;
}

}  // namespace aurec::testing

#endif  // AUREC_TESTS_TEST_UTIL_H_
