#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "cyctea/config.hpp"
#include "cyctea/io.hpp"

namespace cyctea::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

inline int cmd_run(const RunOptions& opt) {
  RunConfig rc;
  try {
    rc = load_run_config(opt.config);
  } catch (const ConfigError& e) {
    spdlog::error("config error at {}", e.what());
    return kUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  if (opt.seed) rc.cycle.rng_seed = *opt.seed;
  if (opt.out) rc.output_dir = *opt.out;

  try {
    namespace fs = std::filesystem;
    Dataset data = load_dataset(rc);
    spdlog::info("dataset: {} + {} entities, splits {}/{}/{}", data.kgs->source.num_entities(),
                 data.kgs->target.num_entities(), data.splits.train.size(), data.splits.valid.size(),
                 data.splits.test.size());
    RunResult result = run_strategy(rc.strategy, data, rc.cycle, [](const std::string& m) { spdlog::info("{}", m); });

    fs::create_directories(rc.output_dir);
    const fs::path out(rc.output_dir);
    write_reports(result.reports, (out / "reports.jsonl").string());
    write_metrics_csv(result, rc.cycle.aligners, (out / "metrics.csv").string());

    Json summary = {{"strategy", std::string(to_string(rc.strategy))},
                    {"seed", rc.cycle.rng_seed},
                    {"iterations", result.reports.size()},
                    {"stop_reason", result.stop_reason},
                    {"supervised", to_json(result.supervised, rc.cycle.aligners)},
                    {"final", to_json(result.final, rc.cycle.aligners)}};
    Json acc = Json::array();
    for (const auto& q : result.accumulated) acc.push_back(to_json(q));
    summary["accumulated_quality"] = acc;
    std::ofstream(out / "metrics.json") << summary.dump(2) << '\n';

    if (rc.write_checkpoints) {
      fs::create_directories(out / "checkpoints");
      for (std::size_t i = 0; i < result.aligners.size(); ++i) {
        const auto& a = *result.aligners[i];
        auto name = "aligner_" + std::to_string(i) + "_" + std::string(to_string(a.kind())) + ".txt";
        save_checkpoint(make_checkpoint(a), (out / "checkpoints" / name).string());
      }
    }
    spdlog::info("final ensemble hits@1 {:.4f} ({} iterations, stop: {})", result.final.ensemble_test.hits_at(1),
                 result.reports.size(), result.stop_reason);
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}

struct SynthOptions {
  SynthSpec spec;
  double train_ratio = 0.1;
  double valid_ratio = 0.1;
  std::string out = "synth";
};

// Writes rel_triples_1, rel_triples_2, ent_links and the three split files.
inline int cmd_synth(const SynthOptions& opt) {
  try {
    validate(opt.spec);
    if (!(opt.train_ratio > 0.0 && opt.valid_ratio > 0.0 && opt.train_ratio + opt.valid_ratio < 1.0)) {
      throw InvalidArgument("train and valid ratios must be positive and sum below 1");
    }
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  try {
    namespace fs = std::filesystem;
    auto pair = generate_synthetic_pair(opt.spec);
    auto splits = split_alignment(pair.gold, opt.train_ratio, opt.valid_ratio, derive_seed(opt.spec.rng_seed, "split"));
    const fs::path out(opt.out);
    fs::create_directories(out);
    save_kg(pair.source, (out / "rel_triples_1").string());
    save_kg(pair.target, (out / "rel_triples_2").string());
    save_links(pair.gold, pair.source, pair.target, (out / "ent_links").string());
    SplitFiles names;
    save_links(splits.train, pair.source, pair.target, (out / names.train).string());
    save_links(splits.valid, pair.source, pair.target, (out / names.valid).string());
    save_links(splits.test, pair.source, pair.target, (out / names.test).string());
    spdlog::info("wrote {} + {} triples and {} links to {}", pair.source.num_triples(), pair.target.num_triples(),
                 pair.gold.size(), out.string());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}

struct EvalOptions {
  std::string config;  // dataset section is used
  std::vector<std::string> checkpoints;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool all_targets = false;
};

inline int cmd_eval(const EvalOptions& opt, std::ostream& os = std::cout) {
  RunConfig rc;
  try {
    rc = load_run_config(opt.config);
  } catch (const Error& e) {
    spdlog::error("config error at {}", e.what());
    return kUsage;
  }
  if (opt.seed) rc.cycle.rng_seed = *opt.seed;
  if (opt.out) rc.output_dir = *opt.out;
  if (opt.checkpoints.empty()) {
    spdlog::error("no checkpoints given");
    return kUsage;
  }
  try {
    namespace fs = std::filesystem;
    Dataset data = load_dataset(rc);
    const KgPair& kgs = *data.kgs;
    std::vector<EntityId> targets = data.splits.test.targets();
    if (opt.all_targets || rc.cycle.rank_against == RankAgainst::all_targets) {
      targets.resize(kgs.target.num_entities());
      for (EntityId t = 0; t < targets.size(); ++t) targets[t] = t;
    }
    std::vector<SimilarityView> views;
    std::vector<double> valid;
    Json rows = Json::array();
    for (const auto& path : opt.checkpoints) {
      Checkpoint c = load_checkpoint(path);
      auto vv = checkpoint_view(c, kgs, data.splits.valid.sources(), data.splits.valid.targets());
      valid.push_back(rank_and_score(vv, data.splits.valid, {1}).metrics.hits_at(1));
      views.push_back(checkpoint_view(c, kgs, data.splits.test.sources(), targets));
      Metrics m = rank_and_score(views.back(), data.splits.test, rc.ks).metrics;
      os << path << " (" << to_string(c.model_kind) << ")";
      for (const auto& [k, v] : m.hits) os << " hits@" << k << "=" << v;
      os << " mrr=" << m.mrr << '\n';
      rows.push_back({{"checkpoint", path},
                      {"model_kind", std::string(to_string(c.model_kind))},
                      {"valid_hits@1", valid.back()},
                      {"test", to_json(m)}});
    }
    std::vector<const SimilarityView*> ptrs;
    for (const auto& v : views) ptrs.push_back(&v);
    auto weights = ensemble_weights(valid);
    Metrics ens = rank_and_score(ensemble_similarity(ptrs, weights), data.splits.test, rc.ks).metrics;
    os << "ensemble";
    for (const auto& [k, v] : ens.hits) os << " hits@" << k << "=" << v;
    os << " mrr=" << ens.mrr << '\n';
    Json doc = {{"aligners", rows}, {"ensemble", {{"weights", weights.alpha}, {"test", to_json(ens)}}}};
    fs::create_directories(rc.output_dir);
    std::ofstream(fs::path(rc.output_dir) / "eval.json") << doc.dump(2) << '\n';
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}

}  // namespace cyctea::cli
