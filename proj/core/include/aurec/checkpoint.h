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

#ifndef AUREC_CHECKPOINT_H_
#define AUREC_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aurec/backbone.h"
#include "aurec/dataset.h"
#include "aurec/uncertainty.h"

namespace aurec {

// Everything a checkpoint records besides the parameter tables.
struct CheckpointMeta {
  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();  // effective config echo
  std::vector<double> loss_trace;
  // Uncertainty checkpoints only: hash of the backbone checkpoint file.
  std::optional<std::uint64_t> backbone_hash;
};

// Checkpoints are JSON documents:
//   {"format": "aurec-checkpoint", "version": 1, "model_kind": ...,
//    "dims": {...}, "seed": ..., "dataset_hash": "<hex>", "config": {...},
//    "loss_trace": [...], "tensors": {name: {"rows", "cols", "data"}}}
// Doubles are written in shortest round-trip form, so reading back is exact.
std::string SerializeBackbone(const BackboneModel& model,
                              const CheckpointMeta& meta);
std::string SerializeUncertainty(const UncertaintyModel& model,
                                 const CheckpointMeta& meta);

struct BackboneCheckpoint {
  BackboneModel model;
  CheckpointMeta meta;
};

struct UncertaintyCheckpoint {
  UncertaintyModel model;
  CheckpointMeta meta;
};

// Parses and checks that the checkpoint was trained on `dataset`; rebuilds
// the LightGCN adjacency from it. Throws CheckpointError.
BackboneCheckpoint ParseBackbone(const std::string& text,
                                 const InteractionDataset& dataset);
UncertaintyCheckpoint ParseUncertainty(const std::string& text,
                                       const InteractionDataset& dataset);

// File helpers. The content hash of a checkpoint is Fnv1a64 of its bytes.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

// Reads `path` as an uncertainty checkpoint and rejects it unless it was
// trained on top of the backbone checkpoint whose bytes hash to
// `backbone_hash`.
UncertaintyCheckpoint LoadUncertaintyFor(const std::filesystem::path& path,
                                         const InteractionDataset& dataset,
                                         std::uint64_t backbone_hash);

}  // namespace aurec

#endif  // AUREC_CHECKPOINT_H_
