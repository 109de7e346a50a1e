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

#include "aurec/checkpoint.h"

#include <fstream>
#include <iterator>
#include <sstream>

#include "aurec/errors.h"
#include "aurec/rng.h"

namespace aurec {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "aurec-checkpoint";
constexpr int kVersion = 1;

json TensorJson(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix TensorFromJson(const json& j, const char* name) {
  if (!j.contains(name)) {
    throw CheckpointError(std::string("checkpoint is missing tensor ") + name);
  }
  const json& t = j.at(name);
  const auto rows = t.at("rows").get<Eigen::Index>();
  const auto cols = t.at("cols").get<Eigen::Index>();
  const auto data = t.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw CheckpointError(std::string("tensor ") + name + " has inconsistent shape");
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json Envelope(std::string_view kind, const CheckpointMeta& meta) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["model_kind"] = kind;
  j["seed"] = meta.seed;
  j["dataset_hash"] = HashToHex(meta.dataset_hash);
  if (meta.backbone_hash) j["backbone_hash"] = HashToHex(*meta.backbone_hash);
  j["config"] = meta.config;
  j["loss_trace"] = meta.loss_trace;
  return j;
}

std::uint64_t ParseHex(const json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  std::size_t used = 0;
  const auto value = std::stoull(text, &used, 16);
  if (used != text.size()) throw CheckpointError(std::string("bad ") + key);
  return value;
}

json ParseEnvelope(const std::string& text, const InteractionDataset& dataset,
                   CheckpointMeta& meta) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") +
                          e.what());
  }
  try {
    if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion) {
      throw CheckpointError("not an aurec checkpoint (format/version mismatch)");
    }
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.dataset_hash = ParseHex(j, "dataset_hash");
    if (j.contains("backbone_hash")) meta.backbone_hash = ParseHex(j, "backbone_hash");
    meta.config = j.at("config");
    meta.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::logic_error& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
  if (meta.dataset_hash != dataset.ContentHash()) {
    throw CheckpointError("checkpoint was trained on a different dataset (hash " +
                          HashToHex(meta.dataset_hash) + ", dataset " +
                          HashToHex(dataset.ContentHash()) + ")");
  }
  return j;
}

}  // namespace

std::string SerializeBackbone(const BackboneModel& model,
                              const CheckpointMeta& meta) {
  json j = Envelope(BackboneKindName(model.kind), meta);
  j["dims"] = {{"num_users", model.num_users()},
               {"num_items", model.num_items()},
               {"dim", model.dim()},
               {"num_layers", model.num_layers}};
  j["tensors"] = {{"user_embeddings", TensorJson(model.user_embeddings)},
                  {"item_embeddings", TensorJson(model.item_embeddings)}};
  return j.dump() + "\n";
}

std::string SerializeUncertainty(const UncertaintyModel& model,
                                 const CheckpointMeta& meta) {
  json j = Envelope("uncertainty", meta);
  j["dims"] = {{"num_items", model.num_items()},
               {"dim", model.dim()},
               {"scale_k", model.scale_k},
               {"activation", ActivationName(model.activation)}};
  j["tensors"] = {{"item_table", TensorJson(model.item_table)},
                  {"history_table", TensorJson(model.history_table)}};
  return j.dump() + "\n";
}

BackboneCheckpoint ParseBackbone(const std::string& text,
                                 const InteractionDataset& dataset) {
  BackboneCheckpoint out;
  json j = ParseEnvelope(text, dataset, out.meta);
  try {
    const auto kind = j.at("model_kind").get<std::string>();
    if (kind != "mf" && kind != "lightgcn") {
      throw CheckpointError("expected a backbone checkpoint, got '" + kind + "'");
    }
    out.model.kind = ParseBackboneKind(kind);
    out.model.num_layers = j.at("dims").at("num_layers").get<int>();
    out.model.user_embeddings = TensorFromJson(j.at("tensors"), "user_embeddings");
    out.model.item_embeddings = TensorFromJson(j.at("tensors"), "item_embeddings");
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed backbone checkpoint: ") + e.what());
  }
  if (out.model.num_users() != dataset.num_users() ||
      out.model.num_items() != dataset.num_items() ||
      out.model.item_embeddings.cols() != out.model.user_embeddings.cols()) {
    throw CheckpointError("backbone tables do not match the dataset dimensions");
  }
  if (out.model.kind == BackboneKind::kLightGcn) {
    out.model.adjacency = NormalizedAdjacency::Build(dataset);
  }
  return out;
}

UncertaintyCheckpoint ParseUncertainty(const std::string& text,
                                       const InteractionDataset& dataset) {
  UncertaintyCheckpoint out;
  json j = ParseEnvelope(text, dataset, out.meta);
  try {
    if (j.at("model_kind").get<std::string>() != "uncertainty") {
      throw CheckpointError("expected an uncertainty checkpoint");
    }
    out.model.scale_k = j.at("dims").at("scale_k").get<double>();
    out.model.activation =
        ParseActivation(j.at("dims").at("activation").get<std::string>());
    out.model.item_table = TensorFromJson(j.at("tensors"), "item_table");
    out.model.history_table = TensorFromJson(j.at("tensors"), "history_table");
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed uncertainty checkpoint: ") +
                          e.what());
  }
  if (out.model.num_items() != dataset.num_items() ||
      out.model.history_table.rows() != dataset.num_items() ||
      out.model.history_table.cols() != out.model.item_table.cols()) {
    throw CheckpointError("uncertainty tables do not match the dataset");
  }
  if (!(out.model.scale_k > 0.0)) throw CheckpointError("scale K must be > 0");
  return out;
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

UncertaintyCheckpoint LoadUncertaintyFor(const std::filesystem::path& path,
                                         const InteractionDataset& dataset,
                                         std::uint64_t backbone_hash) {
  UncertaintyCheckpoint ckpt = ParseUncertainty(ReadTextFile(path), dataset);
  if (!ckpt.meta.backbone_hash || *ckpt.meta.backbone_hash != backbone_hash) {
    throw CheckpointError(
        "uncertainty checkpoint " + path.string() +
        " was trained on a different backbone checkpoint (expected " +
        HashToHex(backbone_hash) + ")");
  }
  return ckpt;
}

}  // namespace aurec
