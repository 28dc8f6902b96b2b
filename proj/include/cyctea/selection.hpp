#pragma once

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "cyctea/aligner.hpp"
#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"

namespace cyctea {

struct Candidate {
  std::size_t index;  // column (for a source) or row (for a target) in the view
  double similarity;
};

// Mutual top-n candidate lists over a SimilarityView. by_source[i] lists the
// candidate columns of row i, by_target[j] the candidate rows of column j;
// both sorted by descending similarity.
struct CandidateSets {
  std::vector<EntityId> sources;
  std::vector<EntityId> targets;
  std::vector<std::vector<Candidate>> by_source;
  std::vector<std::vector<Candidate>> by_target;
  std::size_t top_n = 10;
  double sim_threshold = 0.5;

  bool contains(std::size_t i, std::size_t j) const {
    for (const auto& c : by_source[i]) {
      if (c.index == j) return true;
    }
    return false;
  }

  std::size_t num_pairs() const {
    std::size_t n = 0;
    for (const auto& l : by_source) n += l.size();
    return n;
  }
};

struct SelectionOptions {
  std::size_t top_n = 10;
  double sim_threshold = 0.5;
  // Rank preferences by match diversity; false ranks by raw similarity.
  bool diversity = true;
  // Count pi(x, y) once in the numerator of the competing-pair average.
  bool mu_count_pair_once = false;
};

inline CandidateSets build_candidates(const SimilarityView& view, std::size_t top_n, double sim_threshold) {
  if (top_n < 1) throw InvalidArgument("build_candidates: top_n must be >= 1");
  const std::size_t rows = view.rows();
  const std::size_t cols = view.cols();
  CandidateSets c;
  c.sources = view.sources();
  c.targets = view.targets();
  c.top_n = top_n;
  c.sim_threshold = sim_threshold;
  c.by_source.resize(rows);
  c.by_target.resize(cols);

  // Row-wise and column-wise top-n above the floor; ties by ascending id.
  std::vector<std::vector<std::size_t>> row_top(rows), col_top(cols);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < cols; ++j) {
      if (view.at(i, j) >= sim_threshold) idx.push_back(j);
    }
    auto keep = std::min(top_n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        double va = view.at(i, a), vb = view.at(i, b);
                        return va != vb ? va > vb : c.targets[a] < c.targets[b];
                      });
    row_top[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    idx.clear();
    for (std::size_t i = 0; i < rows; ++i) {
      if (view.at(i, j) >= sim_threshold) idx.push_back(i);
    }
    auto keep = std::min(top_n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        double va = view.at(a, j), vb = view.at(b, j);
                        return va != vb ? va > vb : c.sources[a] < c.sources[b];
                      });
    col_top[j].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(col_top[j].begin(), col_top[j].end());
  }
  // Keep only mutual candidacies; row_top is already in preference order.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j : row_top[i]) {
      if (std::binary_search(col_top[j].begin(), col_top[j].end(), i)) {
        c.by_source[i].push_back({j, view.at(i, j)});
        c.by_target[j].push_back({i, view.at(i, j)});
      }
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    std::sort(c.by_target[j].begin(), c.by_target[j].end(), [&](const Candidate& a, const Candidate& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : c.sources[a.index] < c.sources[b.index];
    });
  }
  return c;
}

// Average similarity of the pairs competing with (row i, column j):
// [sum_{y' in N_x} pi(x, y') + sum_{x' in N_y} pi(x', y)] / (|N_x| + |N_y| - 1).
// Taken literally, pi(x, y) is in both sums; `count_pair_once` drops one copy.
inline double mean_competing_similarity(std::size_t i, std::size_t j, const CandidateSets& cands,
                                        const SimilarityView& view, bool count_pair_once = false) {
  const auto& nx = cands.by_source.at(i);
  const auto& ny = cands.by_target.at(j);
  bool in_x = std::any_of(nx.begin(), nx.end(), [&](const Candidate& c) { return c.index == j; });
  bool in_y = std::any_of(ny.begin(), ny.end(), [&](const Candidate& c) { return c.index == i; });
  if (!in_x || !in_y) throw InvalidArgument("mean_competing_similarity: pair is not a mutual candidate");
  double sum = 0.0;
  for (const auto& c : nx) sum += view.at(i, c.index);
  for (const auto& c : ny) sum += view.at(c.index, j);
  if (count_pair_once) sum -= view.at(i, j);
  return sum / static_cast<double>(nx.size() + ny.size() - 1);
}

// tau(x, y) = pi(x, y) - mu(x, y)
inline double match_diversity(std::size_t i, std::size_t j, const CandidateSets& cands, const SimilarityView& view,
                              bool count_pair_once = false) {
  return view.at(i, j) - mean_competing_similarity(i, j, cands, view, count_pair_once);
}

inline constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

// Source-proposing Gale-Shapley over (possibly incomplete) preference lists.
// source_prefs[i] lists target indices best first; target_prefs[j] lists
// source indices best first. Pairs absent from either list are unacceptable.
// Returns the matched target per source, or kUnmatched.
inline std::vector<std::size_t> gale_shapley(const std::vector<std::vector<std::size_t>>& source_prefs,
                                             const std::vector<std::vector<std::size_t>>& target_prefs) {
  const std::size_t n_src = source_prefs.size();
  const std::size_t n_tgt = target_prefs.size();
  // rank[j] maps source -> position in target j's list
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rank(n_tgt);
  for (std::size_t j = 0; j < n_tgt; ++j) {
    for (std::size_t r = 0; r < target_prefs[j].size(); ++r) rank[j].emplace_back(target_prefs[j][r], r);
    std::sort(rank[j].begin(), rank[j].end());
  }
  auto rank_of = [&](std::size_t j, std::size_t i) -> std::size_t {
    auto it = std::lower_bound(rank[j].begin(), rank[j].end(), std::pair{i, std::size_t{0}});
    if (it == rank[j].end() || it->first != i) return kUnmatched;
    return it->second;
  };

  std::vector<std::size_t> next(n_src, 0);
  std::vector<std::size_t> match_src(n_src, kUnmatched);
  std::vector<std::size_t> match_tgt(n_tgt, kUnmatched);
  std::deque<std::size_t> free_sources(n_src);
  std::iota(free_sources.begin(), free_sources.end(), 0);
  while (!free_sources.empty()) {
    std::size_t i = free_sources.front();
    free_sources.pop_front();
    while (next[i] < source_prefs[i].size()) {
      std::size_t j = source_prefs[i][next[i]++];
      std::size_t r = rank_of(j, i);
      if (r == kUnmatched) continue;
      std::size_t cur = match_tgt[j];
      if (cur == kUnmatched) {
        match_tgt[j] = i;
        match_src[i] = j;
        break;
      }
      if (r < rank_of(j, cur)) {
        match_tgt[j] = i;
        match_src[i] = j;
        match_src[cur] = kUnmatched;
        free_sources.push_back(cur);
        break;
      }
    }
  }
  return match_src;
}

// Stable matching over the candidate lists, each side ranking its candidates
// by descending confidence(i, j); ties by ascending target id (sources' lists)
// and ascending source id (targets' lists). Output pairs carry the confidence.
template <typename Confidence>
AlignmentSet stable_match(const CandidateSets& cands, Confidence&& confidence) {
  const std::size_t rows = cands.by_source.size();
  const std::size_t cols = cands.by_target.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> src_scored(rows), tgt_scored(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (const auto& c : cands.by_source[i]) {
      double v = confidence(i, c.index);
      src_scored[i].emplace_back(c.index, v);
      tgt_scored[c.index].emplace_back(i, v);
    }
  }
  std::vector<std::vector<std::size_t>> src_prefs(rows), tgt_prefs(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto& l = src_scored[i];
    std::sort(l.begin(), l.end(), [&](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : cands.targets[a.first] < cands.targets[b.first];
    });
    for (const auto& [j, v] : l) src_prefs[i].push_back(j);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    auto& l = tgt_scored[j];
    std::sort(l.begin(), l.end(), [&](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : cands.sources[a.first] < cands.sources[b.first];
    });
    for (const auto& [i, v] : l) tgt_prefs[j].push_back(i);
  }
  auto match = gale_shapley(src_prefs, tgt_prefs);
  AlignmentSet out;
  for (std::size_t i = 0; i < rows; ++i) {
    if (match[i] == kUnmatched) continue;
    out.insert(cands.sources[i], cands.targets[match[i]], Provenance::proposed, confidence(i, match[i]));
  }
  return out;
}

// Match diversity of every retained candidate pair, row-major by candidate list.
struct DiversityTable {
  std::vector<std::vector<double>> tau;  // parallel to CandidateSets::by_source

  double at(const CandidateSets& c, std::size_t i, std::size_t j) const {
    const auto& l = c.by_source[i];
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (l[k].index == j) return tau[i][k];
    }
    throw InvalidArgument("diversity requested for a non-candidate pair");
  }
};

inline DiversityTable compute_diversity(const CandidateSets& c, const SimilarityView& view, bool count_pair_once) {
  DiversityTable t;
  t.tau.resize(c.by_source.size());
  for (std::size_t i = 0; i < c.by_source.size(); ++i) {
    // Row sum is shared by every candidate of x.
    double row_sum = 0.0;
    for (const auto& cand : c.by_source[i]) row_sum += view.at(i, cand.index);
    for (const auto& cand : c.by_source[i]) {
      const std::size_t j = cand.index;
      double col_sum = 0.0;
      for (const auto& other : c.by_target[j]) col_sum += view.at(other.index, j);
      double sum = row_sum + col_sum - (count_pair_once ? view.at(i, j) : 0.0);
      double mu = sum / static_cast<double>(c.by_source[i].size() + c.by_target[j].size() - 1);
      t.tau[i].push_back(view.at(i, j) - mu);
    }
  }
  return t;
}

// candidates -> confidence (tau or raw pi) -> stable matching
inline AlignmentSet select_from_view(const SimilarityView& view, const SelectionOptions& opt) {
  auto cands = build_candidates(view, opt.top_n, opt.sim_threshold);
  if (!opt.diversity) {
    return stable_match(cands, [&](std::size_t i, std::size_t j) { return view.at(i, j); });
  }
  auto tau = compute_diversity(cands, view, opt.mu_count_pair_once);
  // Lists are short (<= top_n), so a linear lookup per pair is fine.
  return stable_match(cands, [&](std::size_t i, std::size_t j) { return tau.at(cands, i, j); });
}

inline AlignmentSet select_reliable(const Aligner& aligner, const std::vector<EntityId>& sources,
                                    const std::vector<EntityId>& targets, const SelectionOptions& opt) {
  return select_from_view(aligner.similarity_view(sources, targets), opt);
}

// TSV debug dump: source, target, pi, mu, tau per retained candidate pair.
inline void dump_candidates(std::ostream& out, const CandidateSets& c, const SimilarityView& view,
                            bool count_pair_once = false) {
  char buf[128];
  for (std::size_t i = 0; i < c.by_source.size(); ++i) {
    for (const auto& cand : c.by_source[i]) {
      double mu = mean_competing_similarity(i, cand.index, c, view, count_pair_once);
      double pi = view.at(i, cand.index);
      std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g", pi, mu, pi - mu);
      out << c.sources[i] << '\t' << c.targets[cand.index] << '\t' << buf << '\n';
    }
  }
}

}  // namespace cyctea
