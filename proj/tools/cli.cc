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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aurec/backbone.h"
#include "aurec/checkpoint.h"
#include "aurec/dataset.h"
#include "aurec/errors.h"
#include "aurec/evaluation.h"
#include "aurec/ranking.h"
#include "aurec/rng.h"
#include "aurec/synthetic.h"
#include "aurec/uncertainty.h"
#include "run_config.h"

namespace aurec::tools {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Kebab(std::string name) {
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

// A plain config object, or any artifact that carries one under "config".
json LoadConfigFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) {
    return doc["config"];
  }
  if (!doc.is_object()) throw ConfigError("config file must hold an object");
  return doc;
}

void WriteJson(const fs::path& path, const json& doc) {
  WriteTextFile(path, doc.dump(2) + "\n");
}

std::string ReadCheckpointFile(const std::string& path, const char* what) {
  if (path.empty()) {
    throw ConfigError(std::string("--") + what + " is required");
  }
  try {
    return ReadTextFile(path);
  } catch (const DataError& e) {
    throw CheckpointError(e.what());
  }
}

void RequireOut(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("--out is required");
}

InteractionDataset LoadData(const RunConfig& cfg) {
  if (cfg.train.empty() || cfg.test.empty()) {
    throw ConfigError("--train and --test are required");
  }
  return LoadInteractions(cfg.train, cfg.test, cfg.format);
}

struct Models {
  InteractionDataset dataset;
  BackboneCheckpoint backbone;
  FinalEmbeddings embeddings;
  std::optional<UncertaintyCheckpoint> uncertainty;
  json inputs;
};

Models LoadModels(const RunConfig& cfg, bool need_uncertainty) {
  InteractionDataset ds = LoadData(cfg);
  json inputs = {{"dataset_hash", HashToHex(ds.ContentHash())}};
  const std::string text =
      ReadCheckpointFile(cfg.backbone_checkpoint, "backbone-checkpoint");
  const std::uint64_t backbone_hash = Fnv1a64(text);
  inputs["backbone_checkpoint_hash"] = HashToHex(backbone_hash);
  BackboneCheckpoint backbone = ParseBackbone(text, ds);
  FinalEmbeddings emb = Propagate(backbone.model);

  std::optional<UncertaintyCheckpoint> unc;
  if (need_uncertainty || !cfg.uncertainty_checkpoint.empty()) {
    const std::string utext = ReadCheckpointFile(cfg.uncertainty_checkpoint,
                                                 "uncertainty-checkpoint");
    inputs["uncertainty_checkpoint_hash"] = HashToHex(Fnv1a64(utext));
    unc = ParseUncertainty(utext, ds);
    if (!unc->meta.backbone_hash || *unc->meta.backbone_hash != backbone_hash) {
      throw CheckpointError("uncertainty checkpoint " +
                            cfg.uncertainty_checkpoint +
                            " was trained on a different backbone checkpoint");
    }
  }
  return Models{std::move(ds), std::move(backbone), std::move(emb),
                std::move(unc), std::move(inputs)};
}

std::string LambdaTag(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", lambda);
  return buf;
}

json CoverageJson(const CoverageSummary& c) {
  return {{"mean", c.mean_length}, {"num_users", c.num_users}};
}

json GroupJson(const CalibrationGroup& g) {
  return {{"num_users", g.num_users},
          {"tail_ratio", g.tail_ratio ? json(*g.tail_ratio) : json()}};
}

json CalibrationJson(const CalibrationReport& c) {
  return {{"k", c.k},
          {"tail_focus", GroupJson(c.tail_focus)},
          {"head_focus", GroupJson(c.head_focus)}};
}

json MeanJson(const MeanDiagnostic& d) {
  return {{"mean", d.mean},
          {"num_users", d.num_users},
          {"num_skipped", d.num_skipped}};
}

const UncertaintyModel* UncertaintyOf(const Models& m) {
  return m.uncertainty ? &m.uncertainty->model : nullptr;
}

int CmdSynth(const RunConfig& cfg, std::ostream& out) {
  RequireOut(cfg);
  const SyntheticData data = GenerateSynthetic(cfg.synth);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  SaveInteractions(data.dataset, dir / "train.txt", dir / "test.txt",
                   cfg.format);

  json affinity = json::array();
  for (Eigen::Index u = 0; u < data.truth.affinity.rows(); ++u) {
    const auto row = data.truth.affinity.row(u);
    affinity.push_back(std::vector<double>(row.begin(), row.end()));
  }
  const TailPartition tail = ComputeTailPartition(data.dataset);
  WriteJson(dir / "ground_truth.json",
            {{"command", "synth"},
             {"config", cfg.echo()},
             {"dataset_hash", HashToHex(data.dataset.ContentHash())},
             {"exposure", data.truth.exposure},
             {"affinity", affinity},
             {"tail_items", tail.tail_items},
             {"tail_interaction_fraction", tail.tail_interaction_fraction}});
  out << "synth: " << data.dataset.num_train_interactions() << " train / "
      << data.dataset.num_test_interactions() << " test interactions, "
      << tail.tail_items.size() << " tail items -> " << dir.string() << "\n";
  return kExitOk;
}

int CmdTrain(const RunConfig& cfg, std::ostream& out) {
  RequireOut(cfg);
  const InteractionDataset ds = LoadData(cfg);
  BackboneTrainResult result = TrainBackbone(ds, cfg.backbone);
  CheckpointMeta meta;
  meta.dataset_hash = ds.ContentHash();
  meta.seed = cfg.seed;
  meta.config = cfg.echo();
  meta.loss_trace = result.loss_trace;
  WriteTextFile(cfg.out, SerializeBackbone(result.model, meta));
  out << "train: " << BackboneKindName(cfg.backbone.kind) << ", "
      << result.loss_trace.size() << " epochs, final loss "
      << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << " -> "
      << cfg.out << "\n";
  return kExitOk;
}

int CmdTrainUncertainty(const RunConfig& cfg, std::ostream& out) {
  RequireOut(cfg);
  const InteractionDataset ds = LoadData(cfg);
  const std::string text =
      ReadCheckpointFile(cfg.backbone_checkpoint, "backbone-checkpoint");
  const BackboneCheckpoint backbone = ParseBackbone(text, ds);
  const FinalEmbeddings emb = Propagate(backbone.model);
  UncertaintyTrainResult result = TrainUncertainty(ds, emb, cfg.uncertainty);
  CheckpointMeta meta;
  meta.dataset_hash = ds.ContentHash();
  meta.seed = cfg.seed;
  meta.config = cfg.echo();
  meta.loss_trace = result.loss_trace;
  meta.backbone_hash = Fnv1a64(text);
  WriteTextFile(cfg.out, SerializeUncertainty(result.model, meta));
  out << "train-uncertainty: " << result.loss_trace.size()
      << " epochs, final loss "
      << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << " -> "
      << cfg.out << "\n";
  return kExitOk;
}

int CmdRecommend(const RunConfig& cfg, std::ostream& out) {
  if (cfg.lambdas.size() != 1) {
    throw ConfigError("recommend needs exactly one --lambda value");
  }
  const Models m = LoadModels(cfg, false);
  const AurScorer scorer(m.dataset, m.embeddings, UncertaintyOf(m),
                         cfg.lambdas[0]);
  const std::vector<RankedList> lists =
      RecommendAll(scorer, m.dataset, cfg.k, cfg.workers);
  if (cfg.out.empty()) {
    WriteRecommendations(out, lists);
    return kExitOk;
  }
  std::ostringstream tsv;
  WriteRecommendations(tsv, lists);
  WriteTextFile(cfg.out, tsv.str());
  WriteJson(cfg.out + ".json", {{"command", "recommend"},
                                {"lambda", cfg.lambdas[0]},
                                {"k", cfg.k},
                                {"num_users", lists.size()},
                                {"config", cfg.echo()},
                                {"inputs", m.inputs}});
  out << "recommend: " << lists.size() << " users -> " << cfg.out << "\n";
  return kExitOk;
}

std::vector<Protocol> SelectedProtocols(const RunConfig& cfg) {
  if (cfg.protocol == "all") {
    return {Protocol::kOverall, Protocol::kTailAbsolute,
            Protocol::kTailRelative};
  }
  return {ParseProtocol(cfg.protocol)};
}

int CmdEvaluate(const RunConfig& cfg, std::ostream& out) {
  RequireOut(cfg);
  std::set<std::string> tags;
  for (double l : cfg.lambdas) {
    if (!tags.insert(LambdaTag(l)).second) {
      throw ConfigError("lambda values must differ at two decimals");
    }
  }
  const Models m = LoadModels(cfg, false);
  const TailPartition tail = ComputeTailPartition(m.dataset);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);

  for (double lambda : cfg.lambdas) {
    const AurScorer scorer(m.dataset, m.embeddings, UncertaintyOf(m), lambda);
    const CoverageSummary coverage =
        MeanCoverageLength(scorer, m.dataset, cfg.workers);
    const CalibrationReport calibration =
        TailRatioCalibration(scorer, m.dataset, tail, cfg.k, cfg.workers);
    for (Protocol p : SelectedProtocols(cfg)) {
      const EvalReport report =
          Evaluate(scorer, m.dataset, tail, p, cfg.k_list, cfg.workers);
      const std::string name = std::string(ProtocolName(p)) + "_lambda_" +
                               LambdaTag(lambda) + ".json";
      WriteJson(dir / name,
                {{"command", "evaluate"},
                 {"protocol", ProtocolName(p)},
                 {"lambda", lambda},
                 {"metrics", ToJson(report)},
                 {"diagnostics",
                  {{"coverage_length", CoverageJson(coverage)},
                   {"calibration", CalibrationJson(calibration)}}},
                 {"config", cfg.echo()},
                 {"inputs", m.inputs}});
      out << ProtocolName(p) << " lambda=" << LambdaTag(lambda);
      for (std::size_t j = 0; j < report.ks.size(); ++j) {
        out << " recall@" << report.ks[j] << "=" << report.recall[j]
            << " ndcg@" << report.ks[j] << "=" << report.ndcg[j];
      }
      out << " users=" << report.num_users_evaluated << "\n";
    }
  }
  return kExitOk;
}

int CmdDiagnose(const RunConfig& cfg, std::ostream& out) {
  RequireOut(cfg);
  const Models m = LoadModels(cfg, true);
  const UncertaintyModel& unc = m.uncertainty->model;
  const TailPartition tail = ComputeTailPartition(m.dataset);

  // Same initialisation the training run started from.
  UncertaintyTrainConfig init_cfg;
  init_cfg.dim = static_cast<int>(unc.item_table.cols());
  init_cfg.scale_k = unc.scale_k;
  init_cfg.activation = unc.activation;
  init_cfg.seed = m.uncertainty->meta.seed;
  const UncertaintyModel init =
      InitUncertainty(m.dataset.num_items(), init_cfg);

  const MeanDiagnostic corr =
      CorrelationDiagnostic(m.dataset, m.embeddings, unc, cfg.workers);
  const MeanDiagnostic kl =
      KlDiagnostic(m.dataset, m.embeddings, unc, cfg.workers);
  const MeanDiagnostic kl_init =
      KlDiagnostic(m.dataset, m.embeddings, init, cfg.workers);

  json per_lambda = json::array();
  for (double lambda : cfg.lambdas) {
    const AurScorer scorer(m.dataset, m.embeddings, &unc, lambda);
    per_lambda.push_back(
        {{"lambda", lambda},
         {"coverage_length",
          CoverageJson(MeanCoverageLength(scorer, m.dataset, cfg.workers))},
         {"calibration",
          CalibrationJson(TailRatioCalibration(scorer, m.dataset, tail, cfg.k,
                                               cfg.workers))}});
  }
  WriteJson(cfg.out, {{"command", "diagnose"},
                      {"correlation", MeanJson(corr)},
                      {"kl", MeanJson(kl)},
                      {"kl_at_init", MeanJson(kl_init)},
                      {"per_lambda", per_lambda},
                      {"config", cfg.echo()},
                      {"inputs", m.inputs}});
  out << "diagnose: pearson(r^2, sigma^2)=" << corr.mean << " kl=" << kl.mean
      << " (init " << kl_init.mean << ") -> " << cfg.out << "\n";
  return kExitOk;
}

using Command = int (*)(const RunConfig&, std::ostream&);

struct CommandSpec {
  const char* name;
  const char* help;
  Command run;
};

const std::vector<CommandSpec>& Commands() {
  static const std::vector<CommandSpec> commands = {
      {"synth", "generate a skewed synthetic dataset", CmdSynth},
      {"train", "train the backbone", CmdTrain},
      {"train-uncertainty", "train the uncertainty estimator",
       CmdTrainUncertainty},
      {"recommend", "write top-k lists as TSV", CmdRecommend},
      {"evaluate", "recall/ndcg reports per protocol and lambda", CmdEvaluate},
      {"diagnose", "correlation, KL, coverage and calibration", CmdDiagnose},
  };
  return commands;
}

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app("Uncertainty-aware recommendation toolkit", "aurec");
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    Command run;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound(Commands().size());
  for (std::size_t c = 0; c < Commands().size(); ++c) {
    const CommandSpec& spec = Commands()[c];
    Bound& b = bound[c];
    b.sub = app.add_subcommand(spec.name, spec.help);
    b.run = spec.run;
    b.sub->add_option("--config", b.config_file,
                      "JSON config file (or an artifact with a config echo)");
    for (const ConfigKey& key : ConfigKeys()) {
      b.options[key.name] = b.sub->add_option(
          "--" + Kebab(key.name), b.values[key.name],
          std::string(key.help) + " [" + key.default_value.dump() + "]");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  for (Bound& b : bound) {
    if (!b.sub->parsed()) continue;
    json overrides = b.config_file.empty() ? json::object()
                                           : LoadConfigFile(b.config_file);
    for (const ConfigKey& key : ConfigKeys()) {
      if (b.options[key.name]->count() > 0) {
        overrides[key.name] = ParseFlagValue(key, b.values[key.name]);
      }
    }
    // Without an uncertainty model the only meaningful blend is lambda = 1.
    if (!overrides.contains("lambda") &&
        overrides.value("uncertainty_checkpoint", std::string()).empty() &&
        b.sub->get_name() != std::string("diagnose")) {
      overrides["lambda"] = json::array({1.0});
    }
    const RunConfig cfg = RunConfig::FromJson(overrides);
    return b.run(cfg, out);
  }
  return kExitUsage;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  try {
    return Dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace aurec::tools
