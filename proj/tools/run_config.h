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

#ifndef AUREC_TOOLS_RUN_CONFIG_H_
#define AUREC_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aurec/backbone.h"
#include "aurec/dataset.h"
#include "aurec/synthetic.h"
#include "aurec/uncertainty.h"

namespace aurec::tools {

enum class KeyType { kInt, kDouble, kBool, kString, kDoubleList, kIntList };

struct ConfigKey {
  const char* name;  // snake_case; the flag is the kebab-case form
  KeyType type;
  nlohmann::json default_value;
  const char* help;
};

// Every accepted configuration key with its default.
const std::vector<ConfigKey>& ConfigKeys();
const ConfigKey* FindConfigKey(const std::string& name);

// Converts a flag value to JSON according to the key's type. Lists are
// comma separated. Throws ConfigError.
nlohmann::json ParseFlagValue(const ConfigKey& key, const std::string& text);

// The effective, validated configuration of one command invocation.
struct RunConfig {
  // Data.
  std::string train;
  std::string test;
  DatasetFormat format = DatasetFormat::kAdjList;
  // Synthetic data.
  SyntheticSpec synth;
  // Checkpoints and outputs.
  std::string backbone_checkpoint;
  std::string uncertainty_checkpoint;
  std::string out;
  // Training.
  BackboneTrainConfig backbone;
  UncertaintyTrainConfig uncertainty;
  // Inference and evaluation.
  std::vector<double> lambdas;
  std::vector<int> k_list;
  int k = 20;
  std::string protocol;
  int workers = 1;
  std::uint64_t seed = 1;

  // Defaults overlaid with `overrides`. Unknown keys, wrong types and out of
  // range values throw ConfigError.
  static RunConfig FromJson(const nlohmann::json& overrides);

  // All keys with their effective values.
  const nlohmann::json& echo() const { return echo_; }

 private:
  nlohmann::json echo_;
};

}  // namespace aurec::tools

#endif  // AUREC_TOOLS_RUN_CONFIG_H_
