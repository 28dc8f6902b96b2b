#pragma once

#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "cyctea/aligner.hpp"
#include "cyctea/conflict.hpp"
#include "cyctea/ensemble.hpp"
#include "cyctea/kg.hpp"
#include "cyctea/order.hpp"
#include "cyctea/selection.hpp"

namespace cyctea {

enum class Strategy { cycle_teaching, self_training, intersection, union_all, majority_vote };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::cycle_teaching: return "cycle_teaching";
    case Strategy::self_training: return "self_training";
    case Strategy::intersection: return "intersection";
    case Strategy::union_all: return "union";
    case Strategy::majority_vote: return "majority_vote";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  if (s == "cycle_teaching") return Strategy::cycle_teaching;
  if (s == "self_training") return Strategy::self_training;
  if (s == "intersection") return Strategy::intersection;
  if (s == "union") return Strategy::union_all;
  if (s == "majority_vote") return Strategy::majority_vote;
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

enum class RankAgainst { test_targets, all_targets };

struct CycleConfig {
  std::vector<AlignerConfig> aligners;
  double epsilon = 0.2;
  int max_iterations = 10;
  int min_new_pairs = 5;
  int patience = 2;
  SelectionOptions selection;
  bool conflict_resolution = true;
  std::vector<std::size_t> fixed_order;  // empty: arrange every iteration
  RankAgainst rank_against = RankAgainst::test_targets;
  std::vector<int> ks = {1, 5};  // hits@k cutoffs for test metrics; hits@1 is always added
  std::uint64_t rng_seed = 1;
  bool parallel = false;
};

struct Dataset {
  std::shared_ptr<const KgPair> kgs;
  SplitSet splits;
};

struct AlignerReport {
  ModelKind model_kind{};
  std::size_t proposed = 0;
  Quality proposed_quality;
  std::size_t conflicts = 0;
  std::size_t resolved = 0;  // pairs added to the training alignment
  std::size_t dropped = 0;   // pairs rejected by the 1:1 check against training
  Quality resolved_quality;
  std::size_t training_size = 0;
  double valid_hits1 = 0.0;
  Metrics test;
  bool frozen = false;
};

struct IterationReport {
  int iteration = 0;
  std::string strategy;
  std::vector<std::size_t> cycle;
  double cycle_weight = 0.0;
  std::vector<AlignerReport> aligners;
  double ensemble_valid = 0.0;
  Metrics ensemble_test;
};

struct RunSummary {
  std::vector<double> valid_hits1;  // per aligner
  std::vector<Metrics> test;        // per aligner
  double ensemble_valid = 0.0;
  Metrics ensemble_test;
};

struct RunResult {
  std::vector<IterationReport> reports;
  RunSummary supervised;  // after base training only
  RunSummary final;
  std::vector<Quality> accumulated;  // non-seed training pairs vs test gold, per aligner
  std::string stop_reason;
  std::vector<std::unique_ptr<Aligner>> aligners;
};

struct AugmentResult {
  std::size_t added = 0;
  std::size_t dropped = 0;
  AlignmentSet pairs;  // the pairs actually added
};

// Appends `resolved` to the aligner's training alignment and fine-tunes for
// semi_epochs without alignment negatives on the new pairs. Pairs that clash
// with existing training pairs are dropped; seed pairs always win.
inline AugmentResult augment_training(Aligner& aligner, const AlignmentSet& resolved) {
  AugmentResult r;
  auto& training = aligner.mutable_training();
  for (const auto& p : resolved) {
    if (training.has_source(p.source) || training.has_target(p.target)) {
      ++r.dropped;
      continue;
    }
    AlignedPair q = p;
    if (q.provenance == Provenance::seed) q.provenance = Provenance::proposed;
    training.insert(q);
    r.pairs.insert(q);
    ++r.added;
  }
  const int epochs = aligner.config().semi_epochs;
  if (r.added == 0 || epochs == 0) {
    aligner.skip_epochs(epochs);
    return r;
  }
  aligner.fit(epochs, true);
  return r;
}

namespace detail {

inline void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  for (auto& j : jobs) j.get();
}

class Runner {
 public:
  using Observer = std::function<void(const std::string&)>;

  Runner(const Dataset& data, const CycleConfig& config, Strategy strategy, Observer observer = {})
      : data_(data), config_(config), strategy_(strategy), observer_(std::move(observer)) {
    check();
    for (std::size_t i = 0; i < config_.aligners.size(); ++i) {
      AlignerConfig c = config_.aligners[i];
      c.rng_seed = derive_seed(config_.rng_seed, "aligner", i);
      aligners_.push_back(std::make_unique<Aligner>(data_.kgs, c));
      aligners_.back()->set_training(data_.splits.train);
    }
    frozen_.assign(aligners_.size(), 0);
    test_targets_ = data_.splits.test.targets();
    if (config_.rank_against == RankAgainst::all_targets) {
      eval_targets_.resize(data_.kgs->target.num_entities());
      for (EntityId t = 0; t < eval_targets_.size(); ++t) eval_targets_[t] = t;
    } else {
      eval_targets_ = test_targets_;
    }
  }

  RunResult run() {
    RunResult result;
    for_each_index(aligners_.size(), config_.parallel, [&](std::size_t i) {
      guarded_train(i, [&] { aligners_[i]->fit(aligners_[i]->config().base_epochs, true); });
    });
    require_survivors();
    result.supervised = summarize();
    note("base training done: ensemble test hits@1 " + std::to_string(result.supervised.ensemble_test.hits_at(1)));

    double best_valid = result.supervised.ensemble_valid;
    int stale = 0;
    result.stop_reason = "max_iterations";
    for (int it = 1; it <= config_.max_iterations; ++it) {
      IterationReport rep = iterate(it);
      std::size_t added = 0;
      for (const auto& a : rep.aligners) added += a.resolved;
      note("iteration " + std::to_string(it) + ": added " + std::to_string(added) + " pairs, ensemble valid hits@1 " +
           std::to_string(rep.ensemble_valid));
      result.reports.push_back(rep);
      if (added < static_cast<std::size_t>(config_.min_new_pairs)) {
        result.stop_reason = "min_new_pairs";
        break;
      }
      if (rep.ensemble_valid > best_valid) {
        best_valid = rep.ensemble_valid;
        stale = 0;
      } else if (++stale >= config_.patience) {
        result.stop_reason = "validation_patience";
        break;
      }
    }
    result.final = summarize();
    for (const auto& a : aligners_) {
      AlignmentSet fresh;
      for (const auto& p : a->training()) {
        if (p.provenance != Provenance::seed) fresh.insert(p);
      }
      result.accumulated.push_back(alignment_quality(fresh, data_.splits.test));
    }
    result.aligners = std::move(aligners_);
    return result;
  }

 private:
  void check() const {
    const std::size_t k = config_.aligners.size();
    if (k == 0) throw InvalidArgument("at least one aligner is required");
    if (strategy_ == Strategy::cycle_teaching && k < 2) {
      throw InvalidArgument("cycle teaching needs k >= 2 aligners; use the self_training baseline for k = 1");
    }
    if (strategy_ == Strategy::majority_vote && k % 2 == 0) {
      throw InvalidArgument("majority_vote needs an odd number of aligners");
    }
    if (config_.epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
    if (config_.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (data_.splits.train.empty()) throw InvalidArgument("seed alignment is empty");
    if (data_.splits.valid.empty()) throw InvalidArgument("validation alignment is empty");
    if (data_.splits.test.empty()) throw InvalidArgument("test alignment is empty");
    if (!config_.fixed_order.empty()) {
      std::vector<std::size_t> sorted = config_.fixed_order;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i || sorted.size() != k) throw InvalidArgument("fixed_order must be a permutation of the aligners");
      }
    }
  }

  void note(const std::string& msg) const {
    if (observer_) observer_(msg);
  }

  void guarded_train(std::size_t i, const std::function<void()>& train) {
    if (frozen_[i]) return;
    auto backup = aligners_[i]->snapshot();
    try {
      train();
    } catch (const DivergenceError& e) {
      aligners_[i]->restore(std::move(backup));
      frozen_[i] = 1;
      note(std::string("aligner ") + std::to_string(i) + " frozen: " + e.what());
    }
  }

  std::vector<std::size_t> active() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < aligners_.size(); ++i) {
      if (!frozen_[i]) out.push_back(i);
    }
    return out;
  }

  void require_survivors() const {
    std::size_t need = strategy_ == Strategy::cycle_teaching ? 2 : 1;
    if (active().size() < need) throw Error("too few aligners survived training");
  }

  double ensemble_valid(const std::vector<double>& valid) const {
    std::vector<SimilarityView> views;
    for (const auto& a : aligners_) views.push_back(a->similarity_view(data_.splits.valid.sources(), data_.splits.valid.targets()));
    std::vector<const SimilarityView*> ptrs;
    for (const auto& v : views) ptrs.push_back(&v);
    auto ens = ensemble_similarity(ptrs, ensemble_weights(valid));
    return rank_and_score(ens, data_.splits.valid, {1}).metrics.hits_at(1);
  }

  RunSummary summarize() const {
    RunSummary s;
    std::vector<SimilarityView> views;
    const auto sources = data_.splits.test.sources();
    for (const auto& a : aligners_) {
      s.valid_hits1.push_back(a->validate(data_.splits.valid));
      views.push_back(a->similarity_view(sources, eval_targets_));
      s.test.push_back(rank_and_score(views.back(), data_.splits.test, test_ks()).metrics);
    }
    std::vector<const SimilarityView*> ptrs;
    for (const auto& v : views) ptrs.push_back(&v);
    auto weights = ensemble_weights(s.valid_hits1);
    s.ensemble_test = rank_and_score(ensemble_similarity(ptrs, weights), data_.splits.test, test_ks()).metrics;
    s.ensemble_valid = ensemble_valid(s.valid_hits1);
    return s;
  }

  std::vector<int> test_ks() const {
    std::vector<int> ks = config_.ks;
    ks.push_back(1);
    return ks;
  }

  // Test pairs whose endpoints are both still unaligned for aligner i.
  AlignmentSet eligible_gold(const Aligner& a) const {
    AlignmentSet g;
    for (const auto& p : data_.splits.test) {
      if (!a.training().has_source(p.source) && !a.training().has_target(p.target)) g.insert(p);
    }
    return g;
  }

  IterationReport iterate(int it) {
    const std::size_t k = aligners_.size();
    IterationReport rep;
    rep.iteration = it;
    rep.strategy = std::string(to_string(strategy_));
    rep.aligners.resize(k);

    // (2) every aligner proposes from its own unaligned pools
    std::vector<SimilarityView> views(k);
    std::vector<AlignmentSet> proposals(k), eligible(k);
    std::vector<double> valid(k, 0.0);
    for_each_index(k, config_.parallel, [&](std::size_t i) {
      const Aligner& a = *aligners_[i];
      std::vector<EntityId> src, tgt;
      for (EntityId s : data_.splits.test.sources()) {
        if (!a.training().has_source(s)) src.push_back(s);
      }
      for (EntityId t : test_targets_) {
        if (!a.training().has_target(t)) tgt.push_back(t);
      }
      views[i] = a.similarity_view(src, tgt);
      if (!frozen_[i]) proposals[i] = select_from_view(views[i], config_.selection);
      valid[i] = a.validate(data_.splits.valid);
      eligible[i] = eligible_gold(a);
    });
    for (std::size_t i = 0; i < k; ++i) {
      auto& r = rep.aligners[i];
      r.model_kind = aligners_[i]->kind();
      r.proposed = proposals[i].size();
      r.proposed_quality = alignment_quality(proposals[i], eligible[i]);
      r.frozen = frozen_[i] != 0;
    }

    // (3) + (4) decide what each aligner receives
    std::vector<AlignmentSet> incoming(k);
    const auto live = active();
    switch (strategy_) {
      case Strategy::cycle_teaching: {
        TeachingOrder order = teaching_order(live, proposals, valid);
        rep.cycle.clear();
        for (std::size_t p : order.cycle) rep.cycle.push_back(live[p]);
        rep.cycle_weight = order.total_weight;
        for (std::size_t p = 0; p < order.cycle.size(); ++p) {
          std::size_t j = live[order.cycle[p]];
          std::size_t i = live[order.predecessor(order.cycle[p])];
          AlignmentSet received = within_pools(proposals[i], views[j]);
          ConflictSet conflicts = find_conflicts(proposals[j], received);
          rep.aligners[j].conflicts = conflicts.size();
          if (!config_.conflict_resolution) {
            incoming[j] = merge_by_confidence({&proposals[j], &received});
            continue;
          }
          auto pools = rematch_pools(proposals[j], received, views[j].targets());
          SimilarityView view_pred = aligners_[i]->similarity_view(pools.sources, pools.targets);
          incoming[j] = resolve_conflicts(conflicts, proposals[j], received, views[j], view_pred, valid[j], valid[i],
                                          config_.selection);
        }
        break;
      }
      case Strategy::self_training:
        for (std::size_t i : live) incoming[i] = proposals[i];
        break;
      case Strategy::intersection:
      case Strategy::union_all:
      case Strategy::majority_vote: {
        AlignmentSet shared = combine(live, proposals);
        for (std::size_t i : live) incoming[i] = shared;
        break;
      }
    }

    // augment + fine-tune
    std::vector<AugmentResult> aug(k);
    for_each_index(k, config_.parallel, [&](std::size_t i) {
      if (frozen_[i]) return;
      guarded_train(i, [&] { aug[i] = augment_training(*aligners_[i], incoming[i]); });
      if (frozen_[i]) aug[i] = {};
    });
    require_survivors();

    // (5) report
    RunSummary s = summarize();
    for (std::size_t i = 0; i < k; ++i) {
      auto& r = rep.aligners[i];
      r.resolved = aug[i].added;
      r.dropped = aug[i].dropped;
      r.resolved_quality = alignment_quality(aug[i].pairs, eligible[i]);
      r.training_size = aligners_[i]->training().size();
      r.valid_hits1 = s.valid_hits1[i];
      r.test = s.test[i];
      r.frozen = frozen_[i] != 0;
    }
    rep.ensemble_valid = s.ensemble_valid;
    rep.ensemble_test = s.ensemble_test;
    return rep;
  }

  // Drops pairs the receiving aligner cannot use because an endpoint is
  // already in its training alignment.
  static AlignmentSet within_pools(const AlignmentSet& proposal, const SimilarityView& pools) {
    AlignmentSet out;
    for (const auto& p : proposal) {
      if (pools.row_of(p.source) && pools.col_of(p.target)) out.insert(p);
    }
    return out;
  }

  TeachingOrder teaching_order(const std::vector<std::size_t>& live, const std::vector<AlignmentSet>& proposals,
                               const std::vector<double>& valid) const {
    WeightMatrix w(live.size());
    for (std::size_t a = 0; a < live.size(); ++a) {
      for (std::size_t b = 0; b < live.size(); ++b) {
        if (a == b) continue;
        const std::size_t i = live[a], j = live[b];
        w(a, b) = edge_weight(complementarity(proposals[i], proposals[j]), performance_gap(valid[i], valid[j]),
                              config_.epsilon);
      }
    }
    if (config_.fixed_order.empty() || live.size() != aligners_.size()) return arrange_order(w);
    TeachingOrder fixed;
    fixed.cycle = config_.fixed_order;
    fixed.total_weight = cycle_weight(w, fixed.cycle);
    return fixed;
  }

  AlignmentSet combine(const std::vector<std::size_t>& live, const std::vector<AlignmentSet>& proposals) const {
    if (strategy_ == Strategy::union_all) {
      std::vector<const AlignmentSet*> sets;
      for (std::size_t i : live) sets.push_back(&proposals[i]);
      return merge_by_confidence(sets);
    }
    const std::size_t need = strategy_ == Strategy::intersection ? live.size() : live.size() / 2 + 1;
    AlignmentSet out;
    std::vector<AlignedPair> pool;
    for (std::size_t i : live) pool.insert(pool.end(), proposals[i].begin(), proposals[i].end());
    std::stable_sort(pool.begin(), pool.end(),
                     [](const AlignedPair& a, const AlignedPair& b) { return a.confidence > b.confidence; });
    for (const auto& p : pool) {
      if (out.contains(p.source, p.target)) continue;
      std::size_t votes = 0;
      for (std::size_t i : live) votes += proposals[i].contains(p.source, p.target);
      if (votes >= need) out.insert(p);
    }
    return out;
  }

  const Dataset& data_;
  const CycleConfig& config_;
  Strategy strategy_;
  Observer observer_;
  std::vector<std::unique_ptr<Aligner>> aligners_;
  std::vector<char> frozen_;
  std::vector<EntityId> test_targets_;
  std::vector<EntityId> eval_targets_;
};

}  // namespace detail

inline RunResult run_cycle_teaching(const Dataset& data, const CycleConfig& config) {
  return detail::Runner(data, config, Strategy::cycle_teaching).run();
}

inline RunResult run_baseline(Strategy strategy, const Dataset& data, const CycleConfig& config) {
  if (strategy == Strategy::cycle_teaching) throw InvalidArgument("run_baseline: cycle_teaching is not a baseline");
  return detail::Runner(data, config, strategy).run();
}

// `observer` receives short progress messages.
inline RunResult run_strategy(Strategy strategy, const Dataset& data, const CycleConfig& config,
                              std::function<void(const std::string&)> observer = {}) {
  return detail::Runner(data, config, strategy, std::move(observer)).run();
}

}  // namespace cyctea
