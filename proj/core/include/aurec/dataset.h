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

#ifndef AUREC_DATASET_H_
#define AUREC_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aurec/types.h"

namespace aurec {

// Implicit-feedback interactions split into train histories and test truth.
//
// Y(u, i) = 1 iff i is in the train history of u. Histories and test sets
// are kept sorted by item id, contain no duplicates and never overlap.
// Instances are immutable once built and safe to share across threads.
class InteractionDataset {
 public:
  InteractionDataset() = default;

  // Validates ids, duplicates and train/test overlap; throws DataError.
  // Either outer vector may be shorter than `num_users`; missing users get
  // empty sets.
  static InteractionDataset Create(int num_users, int num_items,
                                   std::vector<std::vector<ItemId>> train,
                                   std::vector<std::vector<ItemId>> test);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }

  std::span<const ItemId> train_items(UserId u) const { return train_[u]; }
  std::span<const ItemId> test_items(UserId u) const { return test_[u]; }
  bool InTrain(UserId u, ItemId i) const;

  // Number of users whose train history contains the item.
  std::span<const std::int64_t> item_popularity() const {
    return popularity_;
  }
  std::int64_t num_train_interactions() const { return num_train_; }
  std::int64_t num_test_interactions() const { return num_test_; }

  // Stable 64-bit FNV-1a hash of dimensions and all interactions.
  std::uint64_t ContentHash() const;

  bool operator==(const InteractionDataset&) const = default;

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  std::vector<std::vector<ItemId>> train_;
  std::vector<std::vector<ItemId>> test_;
  std::vector<std::int64_t> popularity_;
  std::int64_t num_train_ = 0;
  std::int64_t num_test_ = 0;
};

enum class DatasetFormat { kAdjList, kPairs };

// "adjlist" or "pairs"; throws ConfigError otherwise.
DatasetFormat ParseDatasetFormat(std::string_view name);
std::string_view DatasetFormatName(DatasetFormat format);

// Parses train and test streams. Dimensions are 1 + the largest id seen in
// either stream unless a `#users=M items=N` first line fixes them. Errors
// carry `<name>:<line>:` prefixes.
InteractionDataset ParseInteractions(std::istream& train, std::istream& test,
                                     DatasetFormat format,
                                     std::string_view train_name = "train",
                                     std::string_view test_name = "test");

InteractionDataset LoadInteractions(const std::filesystem::path& train_path,
                                    const std::filesystem::path& test_path,
                                    DatasetFormat format);

// Writes both files with an explicit dimension header so that loading them
// back yields an identical dataset.
void WriteInteractions(const InteractionDataset& dataset, std::ostream& train,
                       std::ostream& test,
                       DatasetFormat format = DatasetFormat::kAdjList);
void SaveInteractions(const InteractionDataset& dataset,
                      const std::filesystem::path& train_path,
                      const std::filesystem::path& test_path,
                      DatasetFormat format = DatasetFormat::kAdjList);

// Items split by popularity: the least popular items that together hold at
// least half of all train interactions form the tail.
struct TailPartition {
  std::vector<ItemId> tail_items;  // ascending id
  std::vector<ItemId> head_items;  // ascending id
  std::vector<char> is_tail;       // indexed by item id
  double tail_interaction_fraction = 0.0;

  bool IsTail(ItemId i) const { return is_tail[i] != 0; }
};

// Items are ordered by (popularity asc, id asc) and accumulated until the
// running total first reaches half the total. Throws DataError when there
// are no interactions.
TailPartition ComputeTailPartition(std::span<const std::int64_t> popularity);
TailPartition ComputeTailPartition(const InteractionDataset& dataset);

}  // namespace aurec

#endif  // AUREC_DATASET_H_
