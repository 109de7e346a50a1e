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

#include "run_config.h"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

#include "aurec/errors.h"

namespace aurec::tools {
namespace {

using nlohmann::json;

json DefaultLambdaGrid() { return json::array({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}); }

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double ParseDouble(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + key + ": expected a number, got '" + text + "'");
}

long long ParseInt(const std::string& key, const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("--" + key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

void CheckType(const ConfigKey& key, const json& value) {
  auto fail = [&](const char* want) {
    throw ConfigError("config key '" + std::string(key.name) + "' must be " +
                      want + ", got " + value.dump());
  };
  switch (key.type) {
    case KeyType::kInt:
      if (!value.is_number_integer()) fail("an integer");
      break;
    case KeyType::kDouble:
      if (!value.is_number()) fail("a number");
      break;
    case KeyType::kBool:
      if (!value.is_boolean()) fail("a boolean");
      break;
    case KeyType::kString:
      if (!value.is_string()) fail("a string");
      break;
    case KeyType::kDoubleList:
      if (!value.is_array() || value.empty()) fail("a non-empty number list");
      for (const auto& v : value) {
        if (!v.is_number()) fail("a non-empty number list");
      }
      break;
    case KeyType::kIntList:
      if (!value.is_array() || value.empty()) fail("a non-empty integer list");
      for (const auto& v : value) {
        if (!v.is_number_integer()) fail("a non-empty integer list");
      }
      break;
  }
}

}  // namespace

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = {
      {"train", KeyType::kString, "", "train interactions file"},
      {"test", KeyType::kString, "", "test interactions file"},
      {"format", KeyType::kString, "adjlist", "dataset format: adjlist|pairs"},
      {"users", KeyType::kInt, 200, "synthetic: number of users"},
      {"items", KeyType::kInt, 500, "synthetic: number of items"},
      {"latent_dim", KeyType::kInt, 8, "synthetic: latent preference dim"},
      {"skew", KeyType::kDouble, 1.2, "synthetic: popularity skew exponent"},
      {"per_user", KeyType::kInt, 20, "synthetic: interactions per user"},
      {"holdout", KeyType::kDouble, 0.3, "synthetic: test holdout fraction"},
      {"backbone_checkpoint", KeyType::kString, "", "backbone checkpoint"},
      {"uncertainty_checkpoint", KeyType::kString, "",
       "uncertainty checkpoint"},
      {"out", KeyType::kString, "", "output file or directory"},
      {"backbone", KeyType::kString, "mf", "backbone kind: mf|lightgcn"},
      {"dim", KeyType::kInt, 128, "backbone embedding dim"},
      {"layers", KeyType::kInt, 3, "LightGCN propagation layers"},
      {"lr", KeyType::kDouble, 1e-4, "backbone learning rate"},
      {"batch_size", KeyType::kInt, 32, "users per batch"},
      {"epochs", KeyType::kInt, 100, "backbone epochs"},
      {"l2", KeyType::kDouble, 1e-4, "backbone L2 coefficient"},
      {"mu", KeyType::kDouble, 0.1, "negative sampling rate"},
      {"early_stop", KeyType::kBool, false, "stop on a flat loss"},
      {"uncertainty_dim", KeyType::kInt, 1024, "uncertainty table dim"},
      {"uncertainty_lr", KeyType::kDouble, 1e-4, "uncertainty learning rate"},
      {"uncertainty_epochs", KeyType::kInt, 100, "uncertainty epochs"},
      {"alpha", KeyType::kDouble, 1.0, "positive weight (tail control)"},
      {"beta", KeyType::kDouble, 1e-2, "linear logit penalty"},
      {"gamma", KeyType::kDouble, 1e-3, "quadratic logit penalty"},
      {"scale_k", KeyType::kDouble, 1.0, "variance scale K"},
      {"activation", KeyType::kString, "tanh", "user rep activation"},
      {"item_subsample", KeyType::kInt, 0, "items per user (0 = all)"},
      {"lambda", KeyType::kDoubleList, DefaultLambdaGrid(),
       "blend weight(s) of the expectation"},
      {"k_list", KeyType::kIntList, json::array({20, 50}), "metric cutoffs"},
      {"k", KeyType::kInt, 20, "list length for recommend/calibration"},
      {"protocol", KeyType::kString, "all",
       "overall|tail_absolute|tail_relative|all"},
      {"workers", KeyType::kInt, 1, "evaluation threads"},
      {"seed", KeyType::kInt, 1, "random seed"},
  };
  return keys;
}

const ConfigKey* FindConfigKey(const std::string& name) {
  for (const auto& key : ConfigKeys()) {
    if (name == key.name) return &key;
  }
  return nullptr;
}

json ParseFlagValue(const ConfigKey& key, const std::string& text) {
  switch (key.type) {
    case KeyType::kInt:
      return ParseInt(key.name, text);
    case KeyType::kDouble:
      return ParseDouble(key.name, text);
    case KeyType::kBool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError(std::string("--") + key.name + ": expected true|false");
    case KeyType::kString:
      return text;
    case KeyType::kDoubleList: {
      json out = json::array();
      for (const auto& s : SplitCommas(text)) out.push_back(ParseDouble(key.name, s));
      return out;
    }
    case KeyType::kIntList: {
      json out = json::array();
      for (const auto& s : SplitCommas(text)) out.push_back(ParseInt(key.name, s));
      return out;
    }
  }
  return json();
}

RunConfig RunConfig::FromJson(const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("config must be a JSON object");
  json merged = json::object();
  for (const auto& key : ConfigKeys()) merged[key.name] = key.default_value;
  for (const auto& [name, value] : overrides.items()) {
    const ConfigKey* key = FindConfigKey(name);
    if (key == nullptr) throw ConfigError("unknown config key '" + name + "'");
    json v = value;
    if (key->type == KeyType::kDoubleList && v.is_number()) v = json::array({v});
    if (key->type == KeyType::kIntList && v.is_number_integer()) {
      v = json::array({v});
    }
    CheckType(*key, v);
    merged[name] = v;
  }

  RunConfig c;
  c.echo_ = merged;
  auto get_int = [&](const char* name) { return merged.at(name).get<long long>(); };
  auto get_double = [&](const char* name) { return merged.at(name).get<double>(); };
  auto get_string = [&](const char* name) {
    return merged.at(name).get<std::string>();
  };
  auto as_int = [&](const char* name) {
    const long long v = get_int(name);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw ConfigError(std::string("config key '") + name + "' is out of range");
    }
    return static_cast<int>(v);
  };

  const long long seed = get_int("seed");
  if (seed < 0) throw ConfigError("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);

  c.train = get_string("train");
  c.test = get_string("test");
  c.format = ParseDatasetFormat(get_string("format"));

  c.synth.num_users = as_int("users");
  c.synth.num_items = as_int("items");
  c.synth.latent_dim = as_int("latent_dim");
  c.synth.popularity_skew_exponent = get_double("skew");
  c.synth.interactions_per_user = as_int("per_user");
  c.synth.test_holdout_fraction = get_double("holdout");
  c.synth.seed = c.seed;
  c.synth.Validate();

  c.backbone_checkpoint = get_string("backbone_checkpoint");
  c.uncertainty_checkpoint = get_string("uncertainty_checkpoint");
  c.out = get_string("out");

  c.backbone.kind = ParseBackboneKind(get_string("backbone"));
  c.backbone.dim = as_int("dim");
  c.backbone.num_layers = as_int("layers");
  c.backbone.learning_rate = get_double("lr");
  c.backbone.batch_size = as_int("batch_size");
  c.backbone.epochs = as_int("epochs");
  c.backbone.l2 = get_double("l2");
  c.backbone.negative_rate = get_double("mu");
  c.backbone.early_stop = merged.at("early_stop").get<bool>();
  c.backbone.seed = c.seed;
  c.backbone.Validate();

  c.uncertainty.dim = as_int("uncertainty_dim");
  c.uncertainty.learning_rate = get_double("uncertainty_lr");
  c.uncertainty.epochs = as_int("uncertainty_epochs");
  c.uncertainty.alpha = get_double("alpha");
  c.uncertainty.beta = get_double("beta");
  c.uncertainty.gamma = get_double("gamma");
  c.uncertainty.scale_k = get_double("scale_k");
  c.uncertainty.activation = ParseActivation(get_string("activation"));
  c.uncertainty.item_subsample = as_int("item_subsample");
  c.uncertainty.batch_size = c.backbone.batch_size;
  c.uncertainty.seed = c.seed;
  c.uncertainty.Validate();

  c.lambdas = merged.at("lambda").get<std::vector<double>>();
  for (double l : c.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw ConfigError("lambda values must lie in [0, 1]");
    }
  }
  for (long long k : merged.at("k_list").get<std::vector<long long>>()) {
    if (k < 1 || k > std::numeric_limits<int>::max()) {
      throw ConfigError("k_list entries must be >= 1");
    }
    c.k_list.push_back(static_cast<int>(k));
  }
  c.k = as_int("k");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  c.protocol = get_string("protocol");
  if (c.protocol != "all" && c.protocol != "overall" &&
      c.protocol != "tail_absolute" && c.protocol != "tail_relative") {
    throw ConfigError("unknown protocol '" + c.protocol + "'");
  }
  c.workers = as_int("workers");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  return c;
}

}  // namespace aurec::tools
