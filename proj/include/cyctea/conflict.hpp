#pragma once

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"
#include "cyctea/selection.hpp"

namespace cyctea {

struct SourceConflict {
  EntityId source;
  EntityId target_self;
  EntityId target_received;
  friend bool operator==(const SourceConflict&, const SourceConflict&) = default;
};

struct TargetConflict {
  EntityId target;
  EntityId source_self;
  EntityId source_received;
  friend bool operator==(const TargetConflict&, const TargetConflict&) = default;
};

struct ConflictSet {
  std::vector<SourceConflict> source_conflicts;
  std::vector<TargetConflict> target_conflicts;

  bool empty() const { return source_conflicts.empty() && target_conflicts.empty(); }
  std::size_t size() const { return source_conflicts.size() + target_conflicts.size(); }
};

inline ConflictSet find_conflicts(const AlignmentSet& self, const AlignmentSet& received) {
  ConflictSet c;
  for (const auto& p : self) {
    if (auto t = received.target_of(p.source); t && *t != p.target) {
      c.source_conflicts.push_back({p.source, p.target, *t});
    }
    if (auto s = received.source_of(p.target); s && *s != p.source) {
      c.target_conflicts.push_back({p.target, p.source, *s});
    }
  }
  return c;
}

// A pair of one set conflicts when the other set maps either endpoint elsewhere.
inline bool conflicts_with(const AlignedPair& p, const AlignmentSet& other) {
  auto t = other.target_of(p.source);
  if (t && *t != p.target) return true;
  auto s = other.source_of(p.target);
  return s && *s != p.source;
}

// Pairs of self ∪ received that no conflict touches; agreed pairs appear once.
inline AlignmentSet agreed_pairs(const AlignmentSet& self, const AlignmentSet& received) {
  AlignmentSet out;
  for (const auto& p : self) {
    if (!conflicts_with(p, received)) out.insert(p);
  }
  for (const auto& p : received) {
    if (!conflicts_with(p, self) && !out.contains(p.source, p.target)) out.insert(p);
  }
  return out;
}

// Entities of the re-matching subproblem. Sources are all sources of
// conflicting pairs. Targets are those of `target_universe` not taken by an
// agreed pair, which keeps the conflicting targets themselves in play.
struct RematchPools {
  std::vector<EntityId> sources;
  std::vector<EntityId> targets;
};

inline RematchPools rematch_pools(const AlignmentSet& self, const AlignmentSet& received,
                                  const std::vector<EntityId>& target_universe) {
  RematchPools pools;
  std::unordered_set<EntityId> seen;
  auto collect = [&](const AlignmentSet& a, const AlignmentSet& other) {
    for (const auto& p : a) {
      if (conflicts_with(p, other) && seen.insert(p.source).second) pools.sources.push_back(p.source);
    }
  };
  collect(self, received);
  collect(received, self);
  std::sort(pools.sources.begin(), pools.sources.end());
  AlignmentSet agreed = agreed_pairs(self, received);
  for (EntityId t : target_universe) {
    if (!agreed.has_target(t)) pools.targets.push_back(t);
  }
  return pools;
}

// Balance weight of the receiving aligner: valid_self / (valid_self + valid_pred).
inline double balance_weight(double valid_self, double valid_pred) {
  double s = valid_self + valid_pred;
  return s > 0.0 ? valid_self / s : 0.5;
}

// alpha * pi_self + (1 - alpha) * pi_received over the given entities.
inline SimilarityView combined_view(const std::vector<EntityId>& sources, const std::vector<EntityId>& targets,
                                    const SimilarityView& view_self, const SimilarityView& view_received,
                                    double alpha) {
  SimilarityView out(sources, targets);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < targets.size(); ++j) {
      out.at(i, j) = alpha * view_self.score(sources[i], targets[j]) +
                     (1.0 - alpha) * view_received.score(sources[i], targets[j]);
    }
  }
  return out;
}

// Keeps the agreed pairs and re-runs selection for the conflicting sources
// against the free targets using the validation-balanced similarity. The
// target universe is the column set of `view_self`; both views must cover
// the re-matching pools.
inline AlignmentSet resolve_conflicts(const ConflictSet& conflicts, const AlignmentSet& self,
                                      const AlignmentSet& received, const SimilarityView& view_self,
                                      const SimilarityView& view_received, double valid_self, double valid_pred,
                                      const SelectionOptions& options = {}) {
  AlignmentSet out = agreed_pairs(self, received);
  if (conflicts.empty()) return out;
  auto pools = rematch_pools(self, received, view_self.targets());
  if (pools.sources.empty() || pools.targets.empty()) return out;
  double alpha = balance_weight(valid_self, valid_pred);
  auto view = combined_view(pools.sources, pools.targets, view_self, view_received, alpha);
  for (const auto& p : select_from_view(view, options)) {
    out.insert(p.source, p.target, Provenance::resolved, p.confidence);
  }
  return out;
}

// Greedy merge by descending confidence; earlier sets win ties. Used where
// conflicts are settled without re-matching.
inline AlignmentSet merge_by_confidence(const std::vector<const AlignmentSet*>& sets) {
  std::vector<AlignedPair> all;
  for (const auto* s : sets) all.insert(all.end(), s->begin(), s->end());
  std::stable_sort(all.begin(), all.end(),
                   [](const AlignedPair& a, const AlignedPair& b) { return a.confidence > b.confidence; });
  AlignmentSet out;
  for (const auto& p : all) out.insert(p);
  return out;
}

}  // namespace cyctea
