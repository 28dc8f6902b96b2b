#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cyctea/kg.hpp"

namespace cyctea {

// f_com(i -> j) = |A_i \ (A_i ∩ A_j)| / |A_j|; 0 when A_j is empty.
inline double complementarity(const AlignmentSet& a_i, const AlignmentSet& a_j) {
  if (a_j.empty()) return 0.0;
  const double novel = static_cast<double>(a_i.size() - a_i.overlap(a_j));
  return novel / static_cast<double>(a_j.size());
}

// f_per(i -> j) = exp(valid_i - valid_j), validation scores as fractions.
inline double performance_gap(double valid_i, double valid_j) { return std::exp(valid_i - valid_j); }

// w(i -> j) = f_com + epsilon * f_per
inline double edge_weight(double f_com, double f_per, double epsilon) { return f_com + epsilon * f_per; }

// Square matrix of directed edge weights, row = teacher, column = student.
class WeightMatrix {
 public:
  explicit WeightMatrix(std::size_t k) : k_(k), w_(k * k, 0.0) {}
  std::size_t size() const noexcept { return k_; }
  double& operator()(std::size_t i, std::size_t j) { return w_[i * k_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * k_ + j]; }

 private:
  std::size_t k_;
  std::vector<double> w_;
};

// Cyclic teaching order: cycle[p] teaches cycle[(p + 1) % k].
struct TeachingOrder {
  std::vector<std::size_t> cycle;
  double total_weight = 0.0;

  std::size_t successor(std::size_t aligner) const {
    auto it = std::find(cycle.begin(), cycle.end(), aligner);
    auto pos = static_cast<std::size_t>(it - cycle.begin());
    return cycle[(pos + 1) % cycle.size()];
  }
  std::size_t predecessor(std::size_t aligner) const {
    auto it = std::find(cycle.begin(), cycle.end(), aligner);
    auto pos = static_cast<std::size_t>(it - cycle.begin());
    return cycle[(pos + cycle.size() - 1) % cycle.size()];
  }
};

inline double cycle_weight(const WeightMatrix& w, const std::vector<std::size_t>& cycle) {
  double s = 0.0;
  for (std::size_t p = 0; p < cycle.size(); ++p) s += w(cycle[p], cycle[(p + 1) % cycle.size()]);
  return s;
}

// Number of distinct directed Hamiltonian cycles through k labelled nodes
// with a fixed starting node: (k - 1)!.
inline std::uint64_t cycle_count(std::size_t k) {
  std::uint64_t n = 1;
  for (std::size_t i = 2; i < k; ++i) n *= i;
  return n;
}

inline constexpr std::size_t kExhaustiveOrderLimit = 8;

// Maximum-weight directed Hamiltonian cycle. Exhaustive for k <= 8 (ties go to
// the lexicographically smallest cycle starting at aligner 0), greedy
// heaviest-successor walk from aligner 0 beyond that.
inline TeachingOrder arrange_order(const WeightMatrix& w) {
  const std::size_t k = w.size();
  if (k < 2) throw InvalidArgument("arrange_order needs at least two aligners");
  TeachingOrder best;
  if (k <= kExhaustiveOrderLimit) {
    std::vector<std::size_t> cycle(k);
    std::iota(cycle.begin(), cycle.end(), 0);
    bool first = true;
    do {
      double total = cycle_weight(w, cycle);
      if (first || total > best.total_weight) {
        best.cycle = cycle;
        best.total_weight = total;
        first = false;
      }
    } while (std::next_permutation(cycle.begin() + 1, cycle.end()));
    return best;
  }
  std::vector<char> used(k, 0);
  best.cycle.push_back(0);
  used[0] = 1;
  while (best.cycle.size() < k) {
    std::size_t cur = best.cycle.back();
    std::size_t pick = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      if (pick == k || w(cur, j) > w(cur, pick)) pick = j;
    }
    used[pick] = 1;
    best.cycle.push_back(pick);
  }
  best.total_weight = cycle_weight(w, best.cycle);
  return best;
}

}  // namespace cyctea
