#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cyctea/aligner.hpp"
#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"

namespace cyctea {

struct EnsembleWeights {
  std::vector<double> alpha;
  bool uniform_fallback = false;  // every validation score was zero
};

// alpha_i = valid_i / sum_j valid_j; uniform when all scores are zero.
inline EnsembleWeights ensemble_weights(const std::vector<double>& valid_scores) {
  if (valid_scores.empty()) throw InvalidArgument("ensemble_weights: no aligners");
  EnsembleWeights w;
  double total = 0.0;
  for (double v : valid_scores) {
    if (v < 0.0) throw InvalidArgument("ensemble_weights: negative validation score");
    total += v;
  }
  if (total == 0.0) {
    w.alpha.assign(valid_scores.size(), 1.0 / static_cast<double>(valid_scores.size()));
    w.uniform_fallback = true;
    return w;
  }
  for (double v : valid_scores) w.alpha.push_back(v / total);
  return w;
}

// Element-wise sum_i alpha_i * pi_i.
inline SimilarityView ensemble_similarity(const std::vector<const SimilarityView*>& views,
                                          const EnsembleWeights& weights) {
  if (views.empty() || views.size() != weights.alpha.size()) {
    throw InvalidArgument("ensemble_similarity: view and weight counts differ");
  }
  for (const auto* v : views) {
    if (!v->same_shape(*views.front())) throw InvalidArgument("ensemble_similarity: views differ in shape");
  }
  std::vector<double> values(views.front()->values().size(), 0.0);
  for (std::size_t a = 0; a < views.size(); ++a) {
    const auto& src = views[a]->values();
    const double w = weights.alpha[a];
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += w * src[k];
  }
  return SimilarityView(views.front()->sources(), views.front()->targets(), std::move(values));
}

struct Metrics {
  std::vector<std::pair<int, double>> hits;  // (k, hits@k), ascending k
  double mrr = 0.0;
  std::size_t count = 0;

  double hits_at(int k) const {
    for (const auto& [kk, v] : hits) {
      if (kk == k) return v;
    }
    throw InvalidArgument("hits@" + std::to_string(k) + " was not computed");
  }
};

struct SourceRanking {
  EntityId source;
  EntityId gold;
  std::size_t gold_rank;  // 1-based
  std::vector<std::pair<EntityId, double>> top;  // best first, length max(ks)
};

struct RankingResult {
  std::vector<SourceRanking> rankings;
  Metrics metrics;
};

inline RankingResult rank_and_score(const SimilarityView& view, const AlignmentSet& gold,
                                    std::vector<int> ks = {1, 5}) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const std::size_t keep = ks.empty() ? 1 : static_cast<std::size_t>(std::max(1, ks.back()));
  RankingResult r;
  std::vector<std::size_t> hit_counts(ks.size(), 0);
  double rr = 0.0;
  std::vector<std::size_t> order(view.cols());
  for (const auto& p : gold) {
    auto i = view.row_of(p.source);
    auto j = view.col_of(p.target);
    if (!i || !j) throw InvalidArgument("rank_and_score: gold pair outside the view");
    ConstVec row = view.row(*i);
    SourceRanking sr{p.source, p.target, gold_rank(row, *j), {}};
    std::iota(order.begin(), order.end(), 0);
    auto n_top = std::min(keep, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_top), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] != row[b] ? row[a] > row[b] : view.targets()[a] < view.targets()[b];
                      });
    for (std::size_t t = 0; t < n_top; ++t) sr.top.emplace_back(view.targets()[order[t]], row[order[t]]);
    for (std::size_t k = 0; k < ks.size(); ++k) {
      hit_counts[k] += sr.gold_rank <= static_cast<std::size_t>(ks[k]);
    }
    rr += 1.0 / static_cast<double>(sr.gold_rank);
    r.rankings.push_back(std::move(sr));
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, gold.size()));
  for (std::size_t k = 0; k < ks.size(); ++k) r.metrics.hits.emplace_back(ks[k], static_cast<double>(hit_counts[k]) / n);
  r.metrics.mrr = rr / n;
  r.metrics.count = gold.size();
  return r;
}

struct Quality {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
};

// Precision against `proposed`, recall against `gold` (callers restrict gold
// to the pairs that were eligible for proposal).
inline Quality alignment_quality(const AlignmentSet& proposed, const AlignmentSet& gold) {
  Quality q;
  if (proposed.empty()) return q;
  q.correct = proposed.overlap(gold);
  q.precision = static_cast<double>(q.correct) / static_cast<double>(proposed.size());
  q.recall = gold.empty() ? 0.0 : static_cast<double>(q.correct) / static_cast<double>(gold.size());
  q.f1 = q.precision + q.recall > 0.0 ? 2.0 * q.precision * q.recall / (q.precision + q.recall) : 0.0;
  return q;
}

}  // namespace cyctea
