#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyctea/cycle.hpp"
#include "cyctea/synth.hpp"

namespace cyctea {

inline constexpr int kConfigVersion = 1;

// Schema violation in a run configuration; `field` is a JSON-pointer-like path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SyntheticSource {
  SynthSpec spec;
  bool explicit_seed = false;  // otherwise derived from the run seed
  double train_ratio = 0.1;
  double valid_ratio = 0.1;
};

struct FileSource {
  std::string source_triples;
  std::string target_triples;
  std::string links_dir;  // holds train_links, valid_links, test_links
  SplitFiles files;
};

struct RunConfig {
  std::optional<SyntheticSource> synthetic;
  std::optional<FileSource> files;
  Strategy strategy = Strategy::cycle_teaching;
  CycleConfig cycle;
  std::string output_dir = "out";
  std::vector<int> ks = {1, 5};
  bool write_checkpoints = true;
};

namespace detail {

using CJson = nlohmann::json;

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const CJson& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const CJson::exception&) {
      throw ConfigError(path_ + "/" + key, "wrong type");
    }
  }

  template <typename T>
  void require(const char* key, T& out) {
    if (!obj_.contains(key)) throw ConfigError(path_ + "/" + key, "missing required field");
    get(key, out);
  }

  const CJson* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "/" + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + "/" + it.key(), "unknown key");
    }
  }

 private:
  const CJson& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline AlignerConfig parse_aligner(const CJson& j, const std::string& path) {
  Fields f(j, path);
  AlignerConfig c;
  std::string kind;
  f.require("model_kind", kind);
  try {
    c.model_kind = parse_model_kind(kind);
  } catch (const InvalidArgument& e) {
    throw ConfigError(f.path("model_kind"), e.what());
  }
  f.get("dim", c.dim);
  f.get("learning_rate", c.learning_rate);
  f.get("margin", c.margin);
  f.get("negatives_per_positive", c.negatives_per_positive);
  f.get("base_epochs", c.base_epochs);
  f.get("semi_epochs", c.semi_epochs);
  f.get("align_weight", c.align_weight);
  f.get("align_margin", c.align_margin);
  f.get("batch_size", c.batch_size);
  f.get("walk_length", c.walk_length);
  f.get("walks_per_entity", c.walks_per_entity);
  f.get("walk_bias", c.walk_bias);
  f.get("clip_norm", c.clip_norm);
  f.get("swap_aligned", c.swap_aligned);
  f.finish();
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  return c;
}

}  // namespace detail

// Versioned JSON configuration. Unknown keys are errors.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::check;
  detail::Fields root(j, "");
  RunConfig rc;
  int version = 0;
  root.require("version", version);
  check(version == kConfigVersion, "/version", "unsupported version " + std::to_string(version));

  const auto* ds = root.child("dataset");
  check(ds != nullptr, "/dataset", "missing required field");
  {
    detail::Fields d(*ds, "/dataset");
    const auto* syn = d.child("synthetic");
    const auto* fil = d.child("files");
    d.finish();
    check((syn != nullptr) != (fil != nullptr), "/dataset", "exactly one of 'synthetic' or 'files' is required");
    if (syn) {
      detail::Fields s(*syn, "/dataset/synthetic");
      SyntheticSource src;
      s.get("n_entities", src.spec.n_entities);
      s.get("n_relations", src.spec.n_relations);
      s.get("avg_degree", src.spec.avg_degree);
      s.get("overlap_ratio", src.spec.overlap_ratio);
      s.get("structure_noise", src.spec.structure_noise);
      src.explicit_seed = syn->contains("rng_seed");
      s.get("rng_seed", src.spec.rng_seed);
      s.get("train_ratio", src.train_ratio);
      s.get("valid_ratio", src.valid_ratio);
      s.finish();
      try {
        validate(src.spec);
      } catch (const InvalidArgument& e) {
        throw ConfigError("/dataset/synthetic", e.what());
      }
      check(src.train_ratio > 0.0 && src.valid_ratio > 0.0 && src.train_ratio + src.valid_ratio < 1.0,
            "/dataset/synthetic", "train_ratio and valid_ratio must be positive and sum below 1");
      rc.synthetic = src;
    } else {
      detail::Fields s(*fil, "/dataset/files");
      FileSource src;
      s.require("source_triples", src.source_triples);
      s.require("target_triples", src.target_triples);
      s.require("links_dir", src.links_dir);
      s.get("train_links", src.files.train);
      s.get("valid_links", src.files.valid);
      s.get("test_links", src.files.test);
      s.finish();
      namespace fs = std::filesystem;
      for (const auto& [key, p] : {std::pair{"source_triples", src.source_triples},
                                   std::pair{"target_triples", src.target_triples},
                                   std::pair{"links_dir", src.links_dir}}) {
        check(fs::exists(p), std::string("/dataset/files/") + key, "path does not exist: " + p);
      }
      rc.files = src;
    }
  }

  std::string strategy = "cycle_teaching";
  root.get("strategy", strategy);
  try {
    rc.strategy = parse_strategy(strategy);
  } catch (const InvalidArgument& e) {
    throw ConfigError("/strategy", e.what());
  }

  const auto* al = root.child("aligners");
  check(al != nullptr && al->is_array() && !al->empty(), "/aligners", "a non-empty array is required");
  for (std::size_t i = 0; i < al->size(); ++i) {
    rc.cycle.aligners.push_back(detail::parse_aligner((*al)[i], "/aligners/" + std::to_string(i)));
  }

  if (const auto* cy = root.child("cycle")) {
    detail::Fields c(*cy, "/cycle");
    c.get("epsilon", rc.cycle.epsilon);
    c.get("max_iterations", rc.cycle.max_iterations);
    c.get("min_new_pairs", rc.cycle.min_new_pairs);
    c.get("patience", rc.cycle.patience);
    c.get("top_n", rc.cycle.selection.top_n);
    c.get("sim_threshold", rc.cycle.selection.sim_threshold);
    c.get("diversity", rc.cycle.selection.diversity);
    c.get("mu_count_pair_once", rc.cycle.selection.mu_count_pair_once);
    c.get("conflict_resolution", rc.cycle.conflict_resolution);
    c.get("fixed_order", rc.cycle.fixed_order);
    c.get("parallel", rc.cycle.parallel);
    std::string rank = "test_targets";
    c.get("rank_against", rank);
    c.finish();
    check(rank == "test_targets" || rank == "all_targets", "/cycle/rank_against",
          "expected 'test_targets' or 'all_targets'");
    rc.cycle.rank_against = rank == "all_targets" ? RankAgainst::all_targets : RankAgainst::test_targets;
    check(rc.cycle.epsilon >= 0.0, "/cycle/epsilon", "must be >= 0");
    check(rc.cycle.max_iterations >= 1, "/cycle/max_iterations", "must be >= 1");
    check(rc.cycle.min_new_pairs >= 0, "/cycle/min_new_pairs", "must be >= 0");
    check(rc.cycle.patience >= 1, "/cycle/patience", "must be >= 1");
    check(rc.cycle.selection.top_n >= 1, "/cycle/top_n", "must be >= 1");
  }

  const std::size_t k = rc.cycle.aligners.size();
  if (rc.strategy == Strategy::cycle_teaching) {
    check(k >= 2, "/aligners", "cycle_teaching needs at least 2 aligners; use strategy 'self_training' for one");
  }
  if (rc.strategy == Strategy::majority_vote) check(k % 2 == 1, "/aligners", "majority_vote needs an odd number of aligners");
  if (!rc.cycle.fixed_order.empty()) {
    auto sorted = rc.cycle.fixed_order;
    std::sort(sorted.begin(), sorted.end());
    bool perm = sorted.size() == k;
    for (std::size_t i = 0; perm && i < k; ++i) perm = sorted[i] == i;
    check(perm, "/cycle/fixed_order", "must be a permutation of the aligner indices");
  }

  root.get("seed", rc.cycle.rng_seed);
  root.get("output_dir", rc.output_dir);
  if (const auto* m = root.child("metrics")) {
    detail::Fields f(*m, "/metrics");
    f.get("ks", rc.ks);
    f.get("write_checkpoints", rc.write_checkpoints);
    f.finish();
    check(!rc.ks.empty(), "/metrics/ks", "must not be empty");
    for (int x : rc.ks) check(x >= 1, "/metrics/ks", "entries must be >= 1");
  }
  rc.cycle.ks = rc.ks;
  root.finish();
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

// Materialises the configured dataset. Synthetic splits derive their seed
// from the run seed so one number reproduces the whole experiment.
inline Dataset load_dataset(const RunConfig& rc) {
  auto kgs = std::make_shared<KgPair>();
  Dataset d;
  if (rc.synthetic) {
    SynthSpec spec = rc.synthetic->spec;
    if (!rc.synthetic->explicit_seed) spec.rng_seed = derive_seed(rc.cycle.rng_seed, "synth");
    auto pair = generate_synthetic_pair(spec);
    kgs->source = std::move(pair.source);
    kgs->target = std::move(pair.target);
    d.splits = split_alignment(pair.gold, rc.synthetic->train_ratio, rc.synthetic->valid_ratio,
                               derive_seed(spec.rng_seed, "split"));
  } else {
    const auto& f = *rc.files;
    kgs->source = load_kg(f.source_triples);
    kgs->target = load_kg(f.target_triples);
    d.splits = load_splits(f.links_dir, kgs->source, kgs->target, f.files);
  }
  d.kgs = std::move(kgs);
  return d;
}

}  // namespace cyctea
