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

#include "aurec/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "aurec/errors.h"
#include "aurec/rng.h"

namespace aurec {
namespace {

constexpr std::int64_t kMaxId = std::numeric_limits<std::int32_t>::max() - 1;

std::string Where(std::string_view name, std::size_t line) {
  return std::string(name) + ":" + std::to_string(line) + ": ";
}

// Sorts `items` and throws if any id repeats.
void SortUnique(std::vector<ItemId>& items, UserId u, const char* what) {
  std::sort(items.begin(), items.end());
  auto dup = std::adjacent_find(items.begin(), items.end());
  if (dup != items.end()) {
    throw DataError(std::string("duplicate item ") + std::to_string(*dup) +
                    " in " + what + " of user " + std::to_string(u));
  }
}

struct Entry {
  std::int64_t user;
  std::int64_t item;  // -1 for a bare user line
  std::size_t line;
};

struct ParsedFile {
  std::optional<std::pair<std::int64_t, std::int64_t>> header;
  std::vector<Entry> entries;
};

std::optional<std::int64_t> ParseId(std::string_view token) {
  std::int64_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (token.empty() || token.front() == '-' || token.front() == '+') {
    return std::nullopt;
  }
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value > kMaxId) return std::nullopt;
  return value;
}

std::vector<std::string_view> SplitFields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) next = line.size();
    if (next > pos) out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> ParseHeader(std::string_view line,
                                                  std::string_view name) {
  // "#users=M items=N"
  auto fields = SplitFields(line.substr(1), ' ');
  std::optional<std::int64_t> users, items;
  for (auto f : fields) {
    if (f.starts_with("users=")) {
      users = ParseId(f.substr(6));
    } else if (f.starts_with("items=")) {
      items = ParseId(f.substr(6));
    } else {
      users.reset();
      break;
    }
  }
  if (!users || !items || fields.size() != 2) {
    throw DataError(Where(name, 1) + "malformed header, expected " +
                    "'#users=M items=N'");
  }
  return {*users, *items};
}

ParsedFile ParseFile(std::istream& in, DatasetFormat format,
                     std::string_view name) {
  ParsedFile parsed;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line_no != 1) {
        throw DataError(Where(name, line_no) +
                        "header is only allowed on the first line");
      }
      parsed.header = ParseHeader(line, name);
      continue;
    }
    if (format == DatasetFormat::kPairs) {
      auto fields = SplitFields(line, '\t');
      if (fields.size() != 2 || line.find(' ') != std::string_view::npos) {
        throw DataError(Where(name, line_no) +
                        "expected 'user<TAB>item', got '" + std::string(line) +
                        "'");
      }
      auto u = ParseId(fields[0]);
      auto i = ParseId(fields[1]);
      if (!u || !i) {
        throw DataError(Where(name, line_no) + "invalid id in '" +
                        std::string(line) + "'");
      }
      parsed.entries.push_back({*u, *i, line_no});
    } else {
      auto fields = SplitFields(line, ' ');
      if (fields.empty()) continue;
      std::vector<std::int64_t> ids;
      ids.reserve(fields.size());
      for (auto f : fields) {
        auto id = ParseId(f);
        if (!id) {
          throw DataError(Where(name, line_no) + "invalid id '" +
                          std::string(f) + "'");
        }
        ids.push_back(*id);
      }
      if (ids.size() == 1) {
        parsed.entries.push_back({ids[0], -1, line_no});
      }
      for (std::size_t k = 1; k < ids.size(); ++k) {
        parsed.entries.push_back({ids[0], ids[k], line_no});
      }
    }
  }
  if (in.bad()) throw DataError(std::string(name) + ": read error");
  return parsed;
}

std::vector<std::vector<ItemId>> Collect(const ParsedFile& file,
                                         std::int64_t num_users,
                                         std::int64_t num_items,
                                         std::string_view name) {
  std::vector<std::vector<ItemId>> lists(static_cast<std::size_t>(num_users));
  std::unordered_set<std::int64_t> seen;
  for (const Entry& e : file.entries) {
    if (e.user >= num_users) {
      throw DataError(Where(name, e.line) + "user id " +
                      std::to_string(e.user) + " out of declared range [0, " +
                      std::to_string(num_users) + ")");
    }
    if (e.item < 0) continue;
    if (e.item >= num_items) {
      throw DataError(Where(name, e.line) + "item id " +
                      std::to_string(e.item) + " out of declared range [0, " +
                      std::to_string(num_items) + ")");
    }
    if (!seen.insert(e.user * num_items + e.item).second) {
      throw DataError(Where(name, e.line) + "duplicate item " +
                      std::to_string(e.item) + " in history of user " +
                      std::to_string(e.user));
    }
    lists[e.user].push_back(static_cast<ItemId>(e.item));
  }
  return lists;
}

}  // namespace

InteractionDataset InteractionDataset::Create(
    int num_users, int num_items, std::vector<std::vector<ItemId>> train,
    std::vector<std::vector<ItemId>> test) {
  if (num_users < 0 || num_items < 0) {
    throw DataError("dataset dimensions must be non-negative");
  }
  if (train.size() > static_cast<std::size_t>(num_users) ||
      test.size() > static_cast<std::size_t>(num_users)) {
    throw DataError("more user lists than num_users");
  }
  train.resize(num_users);
  test.resize(num_users);

  InteractionDataset d;
  d.num_users_ = num_users;
  d.num_items_ = num_items;
  d.popularity_.assign(num_items, 0);
  for (UserId u = 0; u < num_users; ++u) {
    for (auto* list : {&train[u], &test[u]}) {
      for (ItemId i : *list) {
        if (i < 0 || i >= num_items) {
          throw DataError("item id " + std::to_string(i) + " of user " +
                          std::to_string(u) + " out of range [0, " +
                          std::to_string(num_items) + ")");
        }
      }
    }
    SortUnique(train[u], u, "train history");
    SortUnique(test[u], u, "test set");
    std::vector<ItemId> overlap;
    std::set_intersection(train[u].begin(), train[u].end(), test[u].begin(),
                          test[u].end(), std::back_inserter(overlap));
    if (!overlap.empty()) {
      throw DataError("train/test overlap at (user " + std::to_string(u) +
                      ", item " + std::to_string(overlap.front()) + ")");
    }
    for (ItemId i : train[u]) ++d.popularity_[i];
    d.num_train_ += static_cast<std::int64_t>(train[u].size());
    d.num_test_ += static_cast<std::int64_t>(test[u].size());
  }
  d.train_ = std::move(train);
  d.test_ = std::move(test);
  return d;
}

bool InteractionDataset::InTrain(UserId u, ItemId i) const {
  return std::binary_search(train_[u].begin(), train_[u].end(), i);
}

std::uint64_t InteractionDataset::ContentHash() const {
  std::ostringstream train, test;
  WriteInteractions(*this, train, test, DatasetFormat::kAdjList);
  std::uint64_t h = Fnv1a64(train.str());
  h = Fnv1a64("\x1e", h);
  return Fnv1a64(test.str(), h);
}

DatasetFormat ParseDatasetFormat(std::string_view name) {
  if (name == "adjlist") return DatasetFormat::kAdjList;
  if (name == "pairs") return DatasetFormat::kPairs;
  throw ConfigError("unknown dataset format '" + std::string(name) +
                    "' (expected adjlist or pairs)");
}

std::string_view DatasetFormatName(DatasetFormat format) {
  return format == DatasetFormat::kPairs ? "pairs" : "adjlist";
}

InteractionDataset ParseInteractions(std::istream& train, std::istream& test,
                                     DatasetFormat format,
                                     std::string_view train_name,
                                     std::string_view test_name) {
  ParsedFile tr = ParseFile(train, format, train_name);
  ParsedFile te = ParseFile(test, format, test_name);

  if (tr.header && te.header && *tr.header != *te.header) {
    throw DataError(std::string(test_name) +
                    ":1: header disagrees with the train header");
  }
  std::int64_t num_users = 0;
  std::int64_t num_items = 0;
  if (auto h = tr.header ? tr.header : te.header) {
    num_users = h->first;
    num_items = h->second;
  } else {
    for (const ParsedFile* f : {&tr, &te}) {
      for (const Entry& e : f->entries) {
        num_users = std::max(num_users, e.user + 1);
        num_items = std::max(num_items, e.item + 1);
      }
    }
  }
  auto train_lists = Collect(tr, num_users, num_items, train_name);
  auto test_lists = Collect(te, num_users, num_items, test_name);
  return InteractionDataset::Create(static_cast<int>(num_users),
                                    static_cast<int>(num_items),
                                    std::move(train_lists),
                                    std::move(test_lists));
}

InteractionDataset LoadInteractions(const std::filesystem::path& train_path,
                                    const std::filesystem::path& test_path,
                                    DatasetFormat format) {
  std::ifstream train(train_path);
  if (!train) throw DataError("cannot open " + train_path.string());
  std::ifstream test(test_path);
  if (!test) throw DataError("cannot open " + test_path.string());
  return ParseInteractions(train, test, format, train_path.string(),
                           test_path.string());
}

void WriteInteractions(const InteractionDataset& dataset, std::ostream& train,
                       std::ostream& test, DatasetFormat format) {
  for (std::ostream* out : {&train, &test}) {
    *out << "#users=" << dataset.num_users()
         << " items=" << dataset.num_items() << '\n';
  }
  for (UserId u = 0; u < dataset.num_users(); ++u) {
    auto write = [&](std::ostream& out, std::span<const ItemId> items) {
      if (items.empty()) return;
      if (format == DatasetFormat::kPairs) {
        for (ItemId i : items) out << u << '\t' << i << '\n';
      } else {
        out << u;
        for (ItemId i : items) out << ' ' << i;
        out << '\n';
      }
    };
    write(train, dataset.train_items(u));
    write(test, dataset.test_items(u));
  }
}

void SaveInteractions(const InteractionDataset& dataset,
                      const std::filesystem::path& train_path,
                      const std::filesystem::path& test_path,
                      DatasetFormat format) {
  std::ofstream train(train_path, std::ios::binary);
  std::ofstream test(test_path, std::ios::binary);
  if (!train || !test) {
    throw DataError("cannot write dataset to " + train_path.string() +
                    " / " + test_path.string());
  }
  WriteInteractions(dataset, train, test, format);
  if (!train || !test) throw DataError("write failed");
}

TailPartition ComputeTailPartition(std::span<const std::int64_t> popularity) {
  const std::int64_t total =
      std::accumulate(popularity.begin(), popularity.end(), std::int64_t{0});
  if (total <= 0) {
    throw DataError("tail partition needs at least one train interaction");
  }
  std::vector<ItemId> order(popularity.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    return popularity[a] < popularity[b];
  });

  TailPartition p;
  p.is_tail.assign(popularity.size(), 0);
  std::int64_t cumulative = 0;
  for (ItemId i : order) {
    // Stop once the tail holds at least half: 2 * cumulative >= total.
    if (2 * cumulative >= total) break;
    cumulative += popularity[i];
    p.is_tail[i] = 1;
  }
  for (ItemId i = 0; i < static_cast<ItemId>(popularity.size()); ++i) {
    (p.is_tail[i] ? p.tail_items : p.head_items).push_back(i);
  }
  p.tail_interaction_fraction =
      static_cast<double>(cumulative) / static_cast<double>(total);
  return p;
}

TailPartition ComputeTailPartition(const InteractionDataset& dataset) {
  return ComputeTailPartition(dataset.item_popularity());
}

}  // namespace aurec
