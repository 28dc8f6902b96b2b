#pragma once

// Slow, independent reference implementations used to check the library.
// Nothing here calls into the code under test except plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"

namespace oracle {

using Prefs = std::vector<std::vector<std::size_t>>;
inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Position of `who` in `list`, or kNone when unacceptable.
inline std::size_t position(const std::vector<std::size_t>& list, std::size_t who) {
  for (std::size_t r = 0; r < list.size(); ++r) {
    if (list[r] == who) return r;
  }
  return kNone;
}

// Prefers a over b; kNone (unmatched) is worse than any acceptable partner.
inline bool prefers(const std::vector<std::size_t>& list, std::size_t a, std::size_t b) {
  std::size_t ra = position(list, a);
  if (ra == kNone) return false;
  if (b == kNone) return true;
  return ra < position(list, b);
}

// Number of blocking pairs of `match` (source -> target or kNone). A pair is
// eligible only when each side lists the other.
inline std::size_t blocking_pairs(const Prefs& src, const Prefs& tgt, const std::vector<std::size_t>& match) {
  std::vector<std::size_t> partner(tgt.size(), kNone);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] != kNone) partner[match[i]] = i;
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j : src[i]) {
      if (match[i] == j || position(tgt[j], i) == kNone) continue;
      if (prefers(src[i], j, match[i]) && prefers(tgt[j], i, partner[j])) ++n;
    }
  }
  return n;
}

// Every stable matching by exhaustive search over partial matchings of
// mutually acceptable pairs.
inline std::vector<std::vector<std::size_t>> all_stable_matchings(const Prefs& src, const Prefs& tgt) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> match(src.size(), kNone);
  std::vector<char> used(tgt.size(), 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == src.size()) {
      if (blocking_pairs(src, tgt, match) == 0) out.push_back(match);
      return;
    }
    match[i] = kNone;
    self(self, i + 1);
    for (std::size_t j : src[i]) {
      if (used[j] || position(tgt[j], i) == kNone) continue;
      used[j] = 1;
      match[i] = j;
      self(self, i + 1);
      used[j] = 0;
      match[i] = kNone;
    }
  };
  rec(rec, 0);
  return out;
}

// The stable matching in which every source gets its best stable partner.
inline std::vector<std::size_t> source_optimal_stable_matching(const Prefs& src, const Prefs& tgt) {
  auto all = all_stable_matchings(src, tgt);
  if (all.empty()) return {};
  std::vector<std::size_t> best(src.size(), kNone);
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (const auto& m : all) {
      if (prefers(src[i], m[i], best[i])) best[i] = m[i];
    }
  }
  return best;
}

inline Prefs random_prefs(std::mt19937_64& rng, std::size_t n, std::size_t m, double accept) {
  Prefs p(n);
  std::bernoulli_distribution keep(accept);
  for (auto& l : p) {
    for (std::size_t j = 0; j < m; ++j) {
      if (keep(rng)) l.push_back(j);
    }
    std::shuffle(l.begin(), l.end(), rng);
  }
  return p;
}

// ------------------------------------------------------------ teaching order

struct Cycle {
  std::vector<std::size_t> nodes;
  double weight = -std::numeric_limits<double>::infinity();
};

// Scans all k! permutations, rotates each to start at node 0, and keeps the
// heaviest; ties go to the lexicographically smallest rotation.
inline Cycle best_cycle(const std::vector<std::vector<double>>& w) {
  const std::size_t k = w.size();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::vector<std::size_t>> distinct;
  Cycle best;
  do {
    auto zero = std::find(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> rot(zero, perm.end());
    rot.insert(rot.end(), perm.begin(), zero);
    if (!distinct.insert(rot).second) continue;
    double total = 0.0;
    for (std::size_t p = 0; p < k; ++p) total += w[rot[p]][rot[(p + 1) % k]];
    if (total > best.weight || (total == best.weight && rot < best.nodes)) best = {rot, total};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::size_t distinct_cycles(std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::vector<std::size_t>> distinct;
  do {
    auto zero = std::find(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> rot(zero, perm.end());
    rot.insert(rot.end(), perm.begin(), zero);
    distinct.insert(rot);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return distinct.size();
}

// ------------------------------------------------------------ formulas

using Pair = std::pair<cyctea::EntityId, cyctea::EntityId>;

inline std::set<Pair> pair_set(const cyctea::AlignmentSet& a) {
  std::set<Pair> s;
  for (const auto& p : a) s.insert({p.source, p.target});
  return s;
}

inline double f_com(const cyctea::AlignmentSet& ai, const cyctea::AlignmentSet& aj) {
  auto si = pair_set(ai), sj = pair_set(aj);
  if (sj.empty()) return 0.0;
  std::vector<Pair> diff;
  std::set_difference(si.begin(), si.end(), sj.begin(), sj.end(), std::back_inserter(diff));
  return static_cast<double>(diff.size()) / static_cast<double>(sj.size());
}

inline double f_per(double vi, double vj) { return std::exp(vi - vj); }
inline double w(double fcom, double fper, double eps) { return fcom + eps * fper; }
inline double alpha(double v1, double v2) { return v1 + v2 == 0.0 ? 0.5 : v1 / (v1 + v2); }

inline std::vector<double> alphas(const std::vector<double>& valid) {
  double total = 0.0;
  for (double v : valid) total += v;
  std::vector<double> a;
  for (double v : valid) a.push_back(total == 0.0 ? 1.0 / static_cast<double>(valid.size()) : v / total);
  return a;
}

// Candidate lists built directly from the definition: full sort of each
// row/column (descending value, ascending id), top_n above the floor, then
// keep mutual pairs only.
struct Candidates {
  std::vector<std::set<std::size_t>> nx;  // row -> columns
  std::vector<std::set<std::size_t>> ny;  // column -> rows
};

inline Candidates candidates(const cyctea::SimilarityView& v, std::size_t top_n, double floor) {
  const std::size_t n = v.rows(), m = v.cols();
  std::vector<std::set<std::size_t>> row_top(n), col_top(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> js;
    for (std::size_t j = 0; j < m; ++j) js.push_back(j);
    std::sort(js.begin(), js.end(), [&](std::size_t a, std::size_t b) {
      return v.at(i, a) != v.at(i, b) ? v.at(i, a) > v.at(i, b) : v.targets()[a] < v.targets()[b];
    });
    for (std::size_t r = 0; r < js.size() && row_top[i].size() < top_n; ++r) {
      if (v.at(i, js[r]) >= floor) row_top[i].insert(js[r]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::size_t> is;
    for (std::size_t i = 0; i < n; ++i) is.push_back(i);
    std::sort(is.begin(), is.end(), [&](std::size_t a, std::size_t b) {
      return v.at(a, j) != v.at(b, j) ? v.at(a, j) > v.at(b, j) : v.sources()[a] < v.sources()[b];
    });
    for (std::size_t r = 0; r < is.size() && col_top[j].size() < top_n; ++r) {
      if (v.at(is[r], j) >= floor) col_top[j].insert(is[r]);
    }
  }
  Candidates c{std::vector<std::set<std::size_t>>(n), std::vector<std::set<std::size_t>>(m)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : row_top[i]) {
      if (col_top[j].count(i)) {
        c.nx[i].insert(j);
        c.ny[j].insert(i);
      }
    }
  }
  return c;
}

// mu(x, y) exactly as printed: both sums include pi(x, y).
inline double mu(const cyctea::SimilarityView& v, const Candidates& c, std::size_t i, std::size_t j,
                 bool once = false) {
  double num = 0.0;
  for (std::size_t jj : c.nx[i]) num += v.at(i, jj);
  for (std::size_t ii : c.ny[j]) num += v.at(ii, j);
  if (once) num -= v.at(i, j);
  return num / (static_cast<double>(c.nx[i].size() + c.ny[j].size()) - 1.0);
}

inline double tau(const cyctea::SimilarityView& v, const Candidates& c, std::size_t i, std::size_t j,
                  bool once = false) {
  return v.at(i, j) - mu(v, c, i, j, once);
}

inline std::vector<double> ensemble(const std::vector<std::vector<double>>& views, const std::vector<double>& a) {
  std::vector<double> out(views.front().size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t v = 0; v < views.size(); ++v) out[k] += a[v] * views[v][k];
  }
  return out;
}

// Hits@k and MRR by fully sorting each row, gold placed after its ties.
struct Scores {
  std::map<int, double> hits;
  double mrr = 0.0;
};

inline Scores rank_scores(const cyctea::SimilarityView& v, const cyctea::AlignmentSet& gold, const std::vector<int>& ks) {
  Scores s;
  for (int k : ks) s.hits[k] = 0.0;
  for (const auto& p : gold) {
    std::size_t i = *v.row_of(p.source), g = *v.col_of(p.target);
    std::vector<std::size_t> order(v.cols());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (v.at(i, a) != v.at(i, b)) return v.at(i, a) > v.at(i, b);
      return a != g && b == g;  // gold last among equals
    });
    std::size_t rank = static_cast<std::size_t>(std::find(order.begin(), order.end(), g) - order.begin()) + 1;
    for (int k : ks) s.hits[k] += rank <= static_cast<std::size_t>(k);
    s.mrr += 1.0 / static_cast<double>(rank);
  }
  for (auto& [k, h] : s.hits) h /= static_cast<double>(gold.size());
  s.mrr /= static_cast<double>(gold.size());
  return s;
}

inline cyctea::SimilarityView random_view(std::mt19937_64& rng, std::size_t n, std::size_t m, double lo = -1.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<cyctea::EntityId> s(n), t(m);
  std::iota(s.begin(), s.end(), 0);
  std::iota(t.begin(), t.end(), 0);
  std::vector<double> vals(n * m);
  for (double& x : vals) x = u(rng);
  return cyctea::SimilarityView(s, t, std::move(vals));
}

}  // namespace oracle
