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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and the desk-scale configuration are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aurec/backbone.h"
#include "aurec/checkpoint.h"
#include "aurec/evaluation.h"
#include "aurec/optim.h"
#include "aurec/ranking.h"
#include "aurec/synthetic.h"
#include "aurec/uncertainty.h"
#include "cli.h"
#include "oracles.h"
#include "test_util.h"

namespace aurec {
namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 10.0;
constexpr int kGradInstances = 20;
constexpr double kLogitTolerance = 1e-2;
constexpr int kOracleInstances = 100;
constexpr double kMinCorrelation = 0.3;
constexpr double kDeskBudgetSeconds = 300.0;
constexpr double kMinTailGain = 0.20;      // relative, Tail Absolute R@20
constexpr double kMaxOverallLoss = 0.10;   // relative, Overall R@20
constexpr int kRecallK = 20;

// Desk-scale run shared by criteria 4-7 and 9.
struct DeskConfig {
  SyntheticSpec synth;
  BackboneTrainConfig backbone;
  UncertaintyTrainConfig uncertainty;
  std::vector<double> lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
};

DeskConfig MakeDeskConfig() {
  DeskConfig c;
  c.synth.num_users = 200;
  c.synth.num_items = 500;
  c.synth.latent_dim = 8;
  c.synth.popularity_skew_exponent = 1.2;
  c.synth.interactions_per_user = 20;
  c.synth.test_holdout_fraction = 0.3;
  c.synth.seed = 7;
  c.backbone.kind = BackboneKind::kMf;
  c.backbone.dim = 128;
  c.backbone.learning_rate = 1e-2;
  c.backbone.batch_size = 32;
  c.backbone.epochs = 100;
  c.backbone.l2 = 1e-3;
  c.backbone.negative_rate = 0.1;
  c.backbone.seed = 7;
  c.uncertainty.dim = 32;
  c.uncertainty.learning_rate = 1e-2;
  c.uncertainty.batch_size = 32;
  c.uncertainty.epochs = 50;
  c.uncertainty.alpha = 3.0;
  c.uncertainty.beta = 1e-2;
  c.uncertainty.gamma = 1e-3;
  c.uncertainty.scale_k = 100.0;
  c.uncertainty.seed = 7;
  return c;
}

// The same run expressed as CLI flags.
std::vector<std::string> DeskFlags() {
  return {"--users", "200", "--items", "500", "--latent-dim", "8", "--skew", "1.2",
          "--per-user", "20", "--holdout", "0.3", "--seed", "7", "--backbone", "mf",
          "--dim", "128", "--lr", "1e-2", "--batch-size", "32", "--epochs", "100",
          "--l2", "1e-3", "--mu", "0.1", "--uncertainty-dim", "32",
          "--uncertainty-lr", "1e-2", "--uncertainty-epochs", "50", "--alpha", "3",
          "--beta", "1e-2", "--gamma", "1e-3", "--scale-k", "100"};
}

int failures = 0;

void Report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* fmt, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::span<double> Span(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

double CheckOne(const LossFunction& loss, const std::vector<double>& params,
                const std::vector<double>& grad, std::uint64_t seed) {
  GradientCheckOptions opts;
  opts.seed = seed;
  opts.tolerance = kGradTolerance;
  return FiniteDiffCheck(loss, params, grad, opts).max_relative_error;
}

void Criterion1() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 10), dim(1, 4);
  double worst[3] = {0, 0, 0};  // backbone, uncertainty, joint
  for (int t = 0; t < kGradInstances; ++t) {
    const int m = size(rng), n = size(rng);
    const auto ds = testing::RandomDataset(m, n, 0.35, 0.0, 10'000 + t);
    std::vector<UserId> users;
    for (int u = 0; u < m; ++u) users.push_back(u);
    const auto plan = SampleNegativeWeights(ds, users, 0.5, t, 0);
    for (auto kind : {BackboneKind::kMf, BackboneKind::kLightGcn}) {
      auto bb = InitBackbone(kind, ds, dim(rng), 1 + t % 3, t);
      bb.user_embeddings *= 5.0;
      bb.item_embeddings *= 5.0;
      BackboneGradient g;
      BackboneLoss(bb, ds, plan, 1e-2, &g);
      auto loss = [&](std::span<const double> p) {
        BackboneModel c = bb;
        testing::Unflatten(p, {&c.user_embeddings, &c.item_embeddings});
        return BackboneLoss(c, ds, plan, 1e-2);
      };
      worst[0] = std::max(
          worst[0], CheckOne(loss, testing::Flatten({&bb.user_embeddings, &bb.item_embeddings}),
                             testing::Flatten({&g.users, &g.items}), t));
    }
    {
      FinalEmbeddings emb{testing::RandomMatrix(m, 3, 0.7, rng),
                          testing::RandomMatrix(n, 3, 0.7, rng)};
      UncertaintyTrainConfig cfg;
      cfg.dim = dim(rng);
      cfg.alpha = 1.0 + t % 5;
      cfg.gamma = 1e-2;
      UncertaintyModel um;
      um.item_table = testing::RandomMatrix(n, cfg.dim, 0.8, rng);
      um.history_table = testing::RandomMatrix(n, cfg.dim, 0.8, rng);
      UncertaintyGradient g;
      UncertaintyBatchLoss(um, ds, emb, users, cfg, &g);
      auto loss = [&](std::span<const double> p) {
        UncertaintyModel c = um;
        testing::Unflatten(p, {&c.item_table, &c.history_table});
        return UncertaintyBatchLoss(c, ds, emb, users, cfg);
      };
      worst[1] = std::max(
          worst[1], CheckOne(loss, testing::Flatten({&um.item_table, &um.history_table}),
                             testing::Flatten({&g.item_table, &g.history_table}), t));
    }
    {
      auto bb = InitBackbone(t % 2 ? BackboneKind::kLightGcn : BackboneKind::kMf, ds,
                             dim(rng), 2, t);
      bb.user_embeddings *= 4.0;
      bb.item_embeddings *= 4.0;
      const int d = dim(rng);
      UncertaintyModel um;
      um.scale_k = 1.0 + t % 3;
      um.item_table = testing::RandomMatrix(n, d, 0.6, rng);
      um.history_table = testing::RandomMatrix(n, d, 0.6, rng);
      JointGradient g;
      JointLoss(bb, um, ds, plan, 1e-2, 1e-2, &g);
      auto loss = [&](std::span<const double> p) {
        BackboneModel b = bb;
        UncertaintyModel u = um;
        testing::Unflatten(p, {&b.user_embeddings, &b.item_embeddings, &u.item_table,
                               &u.history_table});
        return JointLoss(b, u, ds, plan, 1e-2, 1e-2);
      };
      worst[2] = std::max(
          worst[2],
          CheckOne(loss,
                   testing::Flatten({&bb.user_embeddings, &bb.item_embeddings, &um.item_table,
                                     &um.history_table}),
                   testing::Flatten({&g.backbone.users, &g.backbone.items,
                                     &g.uncertainty.item_table, &g.uncertainty.history_table}),
                   t));
    }
  }
  const double secs = Seconds(start);
  const double max_err = std::max({worst[0], worst[1], worst[2]});
  Report(1, max_err < kGradTolerance && secs < kGradBudgetSeconds,
         "analytic gradients vs central differences",
         Fmt("max rel err backbone %.2e, uncertainty %.2e, joint %.2e (< 1e-4), ", worst[0],
             worst[1], worst[2]) +
             Fmt("%.0f instances each, %.2f s (< 10 s)", kGradInstances, secs));
}

void Criterion2() {
  const double s0 = testing::TrainSinglePair(0.25, 0.01, 0.0, 1.0, 2000);
  const double target0 = std::log(25.0);
  double worst_gamma = 0;
  for (double gamma : {1e-3, 1e-2, 1e-1}) {
    const double oracle = testing::StationaryLogit(0.25, 0.01, gamma);
    worst_gamma = std::max(worst_gamma,
                           std::abs(testing::TrainSinglePair(0.25, 0.01, gamma, 1.0, 2000) -
                                    oracle));
  }
  const double err0 = std::abs(s0 - target0);
  Report(2, err0 < kLogitTolerance && worst_gamma < kLogitTolerance,
         "single-pair stationary logit",
         Fmt("gamma=0: s=%.5f vs ln25=%.5f (|err| %.1e); gamma>0 vs bisection: max |err| %.1e "
             "(< 1e-2)",
             s0, target0, err0, worst_gamma));
}

void Criterion3() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> users(1, 5), items(2, 12), level(0, 5);
  const std::vector<int> ks{1, 2, 3, 5, 20};
  int done = 0, mismatches = 0, coverage_checks = 0;
  for (int t = 0; done < kOracleInstances; ++t) {
    const int m = users(rng), n = items(rng);
    const auto ds = testing::RandomDataset(m, n, 0.3, 0.3, 20'000 + t);
    if (ds.num_train_interactions() == 0) continue;
    Matrix scores(m, n);
    for (int u = 0; u < m; ++u) {
      for (int i = 0; i < n; ++i) scores(u, i) = 0.2 * level(rng);
    }
    const testing::MatrixScorer scorer(scores);
    const auto part = ComputeTailPartition(ds);
    for (auto p : {Protocol::kOverall, Protocol::kTailAbsolute, Protocol::kTailRelative}) {
      const auto got = Evaluate(scorer, ds, part, p, ks);
      const auto want = testing::BruteForceEvaluate(scores, ds, part, p, ks);
      if (got.recall != want.recall || got.ndcg != want.ndcg ||
          got.num_users_evaluated != want.users || got.num_users_skipped != want.skipped) {
        ++mismatches;
      }
    }
    double sum = 0;
    int counted = 0;
    for (int u = 0; u < m; ++u) {
      if (ds.test_items(u).empty()) continue;
      const Vector row = scores.row(u).transpose();
      const std::span<const double> s(row.data(), static_cast<std::size_t>(n));
      const int want = testing::CoverageByGrowingK(s, ds.train_items(u), ds.test_items(u));
      if (CoverageLength(s, ds.train_items(u), ds.test_items(u)) != want) ++mismatches;
      sum += want;
      ++counted;
      ++coverage_checks;
    }
    const auto mean = MeanCoverageLength(scorer, ds);
    if (mean.num_users != counted || (counted > 0 && mean.mean_length != sum / counted)) {
      ++mismatches;
    }
    ++done;
  }
  Report(3, mismatches == 0, "metrics vs exhaustive oracles",
         Fmt("%.0f instances x 3 protocols x K{1,2,3,5,20}, %.0f coverage users, "
             "%.0f mismatches (exact equality)",
             done, coverage_checks, mismatches));
}

struct DeskRun {
  InteractionDataset ds;
  TailPartition tail;
  FinalEmbeddings emb;
  UncertaintyModel unc;
  UncertaintyModel init;
  double seconds = 0;
};

DeskRun TrainDesk(const DeskConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  DeskRun run;
  run.ds = GenerateSynthetic(c.synth).dataset;
  run.tail = ComputeTailPartition(run.ds);
  run.emb = Propagate(TrainBackbone(run.ds, c.backbone).model);
  run.unc = TrainUncertainty(run.ds, run.emb, c.uncertainty).model;
  run.init = InitUncertainty(run.ds.num_items(), c.uncertainty);
  run.seconds = Seconds(start);
  return run;
}

void Criterion4(const DeskRun& run) {
  const std::vector<int> ks{1, 5, 10, 20, 50};
  const AurScorer blended(run.ds, run.emb, &run.unc, 1.0);
  const AurScorer bare(run.ds, run.emb, nullptr, 1.0);
  int mismatches = 0;
  for (auto p : {Protocol::kOverall, Protocol::kTailAbsolute, Protocol::kTailRelative}) {
    const auto a = Evaluate(blended, run.ds, run.tail, p, ks);
    const auto b = Evaluate(bare, run.ds, run.tail, p, ks);
    if (a.recall != b.recall || a.ndcg != b.ndcg ||
        a.num_users_evaluated != b.num_users_evaluated) {
      ++mismatches;
    }
  }
  const auto ca = MeanCoverageLength(blended, run.ds);
  const auto cb = MeanCoverageLength(bare, run.ds);
  if (ca.mean_length != cb.mean_length) ++mismatches;
  Report(4, mismatches == 0, "lambda=1 blend equals bare backbone",
         Fmt("3 protocols x K{1,5,10,20,50} + coverage, %.0f differences (exact)",
             mismatches));
}

void Criterion5(const DeskRun& run) {
  const auto corr = CorrelationDiagnostic(run.ds, run.emb, run.unc);
  const auto kl = KlDiagnostic(run.ds, run.emb, run.unc);
  const auto kl0 = KlDiagnostic(run.ds, run.emb, run.init);
  Report(5,
         corr.mean > kMinCorrelation && kl.mean < kl0.mean &&
             run.seconds < kDeskBudgetSeconds,
         "variance tracks squared expectation",
         Fmt("mean Pearson(r^2, sigma^2) %.4f (> 0.3), mean KL %.4f vs %.4f at init, ",
             corr.mean, kl.mean, kl0.mean) +
             Fmt("training %.1f s (< 300 s)", run.seconds));
}

double Recall20(const DeskRun& run, double lambda, Protocol p) {
  const AurScorer scorer(run.ds, run.emb, &run.unc, lambda);
  return Evaluate(scorer, run.ds, run.tail, p, std::vector<int>{kRecallK}).recall[0];
}

// Returns the chosen lambda, or a negative value if none qualifies.
double Criterion6(const DeskRun& run, const DeskConfig& c) {
  const double base_tail = Recall20(run, 1.0, Protocol::kTailAbsolute);
  const double base_all = Recall20(run, 1.0, Protocol::kOverall);
  std::ostringstream grid;
  double chosen = -1.0;
  for (double lambda : c.lambdas) {
    if (lambda >= 1.0) continue;
    const double tail = Recall20(run, lambda, Protocol::kTailAbsolute);
    const double all = Recall20(run, lambda, Protocol::kOverall);
    const bool ok = tail >= (1.0 + kMinTailGain) * base_tail &&
                    all >= (1.0 - kMaxOverallLoss) * base_all;
    grid << Fmt(" %.1f:", lambda) << Fmt("%+.0f%%/%+.0f%%", 100 * (tail / base_tail - 1),
                                          100 * (all / base_all - 1));
    if (ok) chosen = std::max(chosen, lambda);
  }
  Report(6, chosen >= 0.0, "tail gain at bounded overall cost",
         Fmt("lambda=1: tail-abs R@20 %.4f, overall R@20 %.4f; chosen lambda %.1f; "
             "tail/overall change per lambda:",
             base_tail, base_all, chosen) +
             grid.str() + " (need >= +20% / >= -10%)");
  return chosen;
}

void Criterion7(const DeskRun& run, double lambda) {
  if (lambda < 0) {
    Report(7, false, "coverage length at chosen lambda", "no lambda chosen in criterion 6");
    return;
  }
  const double base =
      MeanCoverageLength(AurScorer(run.ds, run.emb, &run.unc, 1.0), run.ds).mean_length;
  const double got =
      MeanCoverageLength(AurScorer(run.ds, run.emb, &run.unc, lambda), run.ds).mean_length;
  Report(7, got <= base, "coverage length at chosen lambda",
         Fmt("lambda %.1f: %.2f vs lambda=1: %.2f (need <=)", lambda, got, base));
}

void Criterion8() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(1, 40), heavy(0, 40);
  int bad = 0, ties = 0, singles = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> pop;
    if (t % 10 == 0) {
      pop.assign(1, 1 + t);
      ++singles;
    } else if (t % 10 == 1) {
      pop.assign(len(rng), 1 + t % 5);
      ++ties;
    } else {
      pop.resize(len(rng));
      for (auto& p : pop) p = heavy(rng) * heavy(rng) / 8;
      pop[0] += 1;
    }
    const auto part = ComputeTailPartition(pop);
    std::int64_t total = 0, tail_sum = 0;
    for (auto p : pop) total += p;
    std::vector<int> seen(pop.size(), 0);
    for (ItemId i : part.tail_items) {
      ++seen[i];
      tail_sum += pop[i];
    }
    for (ItemId i : part.head_items) ++seen[i];
    bool ok = part.is_tail == testing::BruteForceTail(pop) && 2 * tail_sum >= total;
    for (int s : seen) ok &= s == 1;
    for (ItemId a : part.tail_items) {
      for (ItemId b : part.head_items) ok &= pop[a] < pop[b] || (pop[a] == pop[b] && a < b);
    }
    bad += !ok;
  }
  Report(8, bad == 0, "tail partition invariants",
         Fmt("100 vectors (%.0f single-item, %.0f all-tie), %.0f violations", singles, ties,
             bad));
}

void Criterion9() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "aurec_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = (dir / "data").string();
  auto with = [&](std::vector<std::string> args) {
    const auto flags = DeskFlags();
    args.insert(args.end(), flags.begin(), flags.end());
    args.insert(args.end(), {"--train", data + "/train.txt", "--test", data + "/test.txt",
                             "--backbone-checkpoint", (dir / "bb.json").string()});
    return args;
  };
  const std::vector<std::vector<std::string>> stages{
      [&] {
        auto a = DeskFlags();
        a.insert(a.begin(), "synth");
        a.insert(a.end(), {"--out", data});
        return a;
      }(),
      with({"train", "--out", (dir / "bb.json").string()}),
      with({"train-uncertainty", "--out", (dir / "un.json").string()}),
      with({"evaluate", "--protocol", "all", "--uncertainty-checkpoint",
            (dir / "un.json").string(), "--out", (dir / "eval").string()}),
      with({"diagnose", "--uncertainty-checkpoint", (dir / "un.json").string(), "--out",
            (dir / "diag.json").string()}),
  };
  std::ostringstream sink;
  for (const auto& args : stages) {
    if (tools::RunCli(args, sink, sink) != 0) {
      Report(9, false, "pipeline replay from echoed config", "first run failed: " + sink.str());
      return;
    }
  }
  // Everything the first run wrote, and one echo per stage to replay from.
  std::map<fs::path, std::string> first;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) first[e.path()] = ReadTextFile(e.path());
  }
  const fs::path echoes = fs::temp_directory_path() / "aurec_acceptance_echo";
  fs::remove_all(echoes);
  fs::create_directories(echoes);
  const std::vector<fs::path> sources{dir / "data/ground_truth.json", dir / "bb.json",
                                      dir / "un.json", dir / "eval/overall_lambda_0.00.json",
                                      dir / "diag.json"};
  for (std::size_t s = 0; s < sources.size(); ++s) {
    fs::copy_file(sources[s], echoes / (std::to_string(s) + ".json"));
  }
  fs::remove_all(dir);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const std::vector<std::string> args{stages[s][0], "--config",
                                        (echoes / (std::to_string(s) + ".json")).string()};
    if (tools::RunCli(args, sink, sink) != 0) {
      Report(9, false, "pipeline replay from echoed config", "replay failed: " + sink.str());
      return;
    }
  }
  int differing = 0, missing = 0;
  for (const auto& [path, bytes] : first) {
    if (!fs::exists(path)) {
      ++missing;
    } else if (ReadTextFile(path) != bytes) {
      ++differing;
    }
  }
  fs::remove_all(echoes);
  Report(9, differing == 0 && missing == 0, "pipeline replay from echoed config",
         Fmt("%.0f artifacts (data, checkpoints, 18 reports, diagnostics): %.0f differ, "
             "%.0f missing (bitwise)",
             first.size(), differing, missing));
}

}  // namespace
}  // namespace aurec

int main() {
  using namespace aurec;
  Criterion1();
  Criterion2();
  Criterion3();
  const DeskConfig config = MakeDeskConfig();
  const DeskRun run = TrainDesk(config);
  Criterion4(run);
  Criterion5(run);
  const double lambda = Criterion6(run, config);
  Criterion7(run, lambda);
  Criterion8();
  Criterion9();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
