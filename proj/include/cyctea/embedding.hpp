#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cyctea/linalg.hpp"

namespace cyctea {

// Entity rows followed by relation rows, all of length `dim`.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, std::size_t n_entities, std::size_t n_relations)
      : dim_(dim), n_entities_(n_entities), n_relations_(n_relations),
        data_((n_entities + n_relations) * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_entities() const noexcept { return n_entities_; }
  std::size_t num_relations() const noexcept { return n_relations_; }

  MutVec entity(std::size_t e) { return {data_.data() + e * dim_, dim_}; }
  ConstVec entity(std::size_t e) const { return {data_.data() + e * dim_, dim_}; }
  MutVec relation(std::size_t r) { return {data_.data() + (n_entities_ + r) * dim_, dim_}; }
  ConstVec relation(std::size_t r) const { return {data_.data() + (n_entities_ + r) * dim_, dim_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  void normalize_entities() {
    for (std::size_t e = 0; e < n_entities_; ++e) normalize(entity(e));
  }

  bool all_finite() const {
    for (double x : data_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  // Xavier-style uniform initialisation, entities unit-normalised.
  void randomize(std::mt19937_64& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(2 * dim_));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& x : data_) x = u(rng);
    normalize_entities();
  }

 private:
  std::size_t dim_ = 0;
  std::size_t n_entities_ = 0;
  std::size_t n_relations_ = 0;
  std::vector<double> data_;
};

// Dense |sources| x |targets| matrix of similarity scores.
class SimilarityView {
 public:
  SimilarityView() = default;
  SimilarityView(std::vector<EntityId> sources, std::vector<EntityId> targets)
      : sources_(std::move(sources)), targets_(std::move(targets)),
        values_(sources_.size() * targets_.size(), 0.0) {
    index();
  }
  SimilarityView(std::vector<EntityId> sources, std::vector<EntityId> targets,
                 std::vector<double> values)
      : sources_(std::move(sources)), targets_(std::move(targets)), values_(std::move(values)) {
    if (values_.size() != sources_.size() * targets_.size()) {
      throw InvalidArgument("similarity view: value count does not match shape");
    }
    index();
  }

  std::size_t rows() const noexcept { return sources_.size(); }
  std::size_t cols() const noexcept { return targets_.size(); }
  const std::vector<EntityId>& sources() const noexcept { return sources_; }
  const std::vector<EntityId>& targets() const noexcept { return targets_; }

  double& at(std::size_t i, std::size_t j) { return values_[i * targets_.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values_[i * targets_.size() + j]; }
  ConstVec row(std::size_t i) const { return {values_.data() + i * targets_.size(), targets_.size()}; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::optional<std::size_t> row_of(EntityId source) const {
    auto it = row_index_.find(source);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> col_of(EntityId target) const {
    auto it = col_index_.find(target);
    if (it == col_index_.end()) return std::nullopt;
    return it->second;
  }

  // Similarity by entity ids; throws when either id is outside the view.
  double score(EntityId source, EntityId target) const {
    auto i = row_of(source);
    auto j = col_of(target);
    if (!i || !j) {
      throw InvalidArgument("similarity view does not cover pair (" + std::to_string(source) +
                            ", " + std::to_string(target) + ")");
    }
    return at(*i, *j);
  }

  bool same_shape(const SimilarityView& o) const {
    return sources_ == o.sources_ && targets_ == o.targets_;
  }

 private:
  void index() {
    row_index_.reserve(sources_.size());
    for (std::size_t i = 0; i < sources_.size(); ++i) row_index_.emplace(sources_[i], i);
    col_index_.reserve(targets_.size());
    for (std::size_t j = 0; j < targets_.size(); ++j) col_index_.emplace(targets_[j], j);
  }

  std::vector<EntityId> sources_;
  std::vector<EntityId> targets_;
  std::vector<double> values_;
  std::unordered_map<EntityId, std::size_t> row_index_;
  std::unordered_map<EntityId, std::size_t> col_index_;
};

// Cosine similarity matrix between two sets of row vectors.
template <typename SourceVec, typename TargetVec>
SimilarityView cosine_view(const std::vector<EntityId>& sources, const std::vector<EntityId>& targets,
                           SourceVec&& source_vec, TargetVec&& target_vec) {
  SimilarityView view(sources, targets);
  std::vector<Vector> tnorm;
  tnorm.reserve(targets.size());
  for (EntityId t : targets) {
    ConstVec v = target_vec(t);
    Vector u(v.begin(), v.end());
    double n = norm2(u);
    if (n > 0.0) {
      for (double& x : u) x /= n;
    }
    tnorm.push_back(std::move(u));
  }
  Vector s;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ConstVec v = source_vec(sources[i]);
    s.assign(v.begin(), v.end());
    double n = norm2(s);
    if (n > 0.0) {
      for (double& x : s) x /= n;
    }
    for (std::size_t j = 0; j < targets.size(); ++j) {
      view.at(i, j) = std::clamp(dot(s, tnorm[j]), -1.0, 1.0);
    }
  }
  return view;
}

}  // namespace cyctea
