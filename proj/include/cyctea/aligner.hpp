#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"
#include "cyctea/models.hpp"

namespace cyctea {

// Rank of the gold column in `row`, counting every other column whose score
// is >= the gold score ahead of it (ties resolve pessimistically).
inline std::size_t gold_rank(ConstVec row, std::size_t gold) {
  const double g = row[gold];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != gold && row[j] >= g) ++rank;
  }
  return rank;
}

// An embedding-based aligner: one model, its parameters, its optimiser state
// and its accumulated training alignment.
class Aligner {
 public:
  Aligner(std::shared_ptr<const KgPair> kgs, AlignerConfig config)
      : kgs_(std::move(kgs)), config_(config), rng_(derive_seed(config.rng_seed, "aligner")) {
    cyctea::validate(config_);
    objective_ = make_objective(config_, kgs_);
    std::mt19937_64 init_rng(derive_seed(config_.rng_seed, "init"));
    params_ = objective_->init(static_cast<std::size_t>(config_.dim), init_rng);
    adagrad_ = params_.zeros_like();
  }

  const AlignerConfig& config() const noexcept { return config_; }
  ModelKind kind() const noexcept { return config_.model_kind; }
  const KgPair& kgs() const noexcept { return *kgs_; }
  const Objective& objective() const noexcept { return *objective_; }
  const ModelParams& params() const noexcept { return params_; }
  int epochs_trained() const noexcept { return epochs_; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

  const AlignmentSet& training() const noexcept { return training_; }
  void set_training(AlignmentSet pairs) { training_ = std::move(pairs); }
  AlignmentSet& mutable_training() noexcept { return training_; }

  // Mini-batch training on `pairs` (source/target ids local to each graph).
  // Alignment negatives are drawn only for seed pairs, and only when
  // `use_negatives` is set.
  void train(const AlignmentSet& pairs, int epochs, bool use_negatives) {
    if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
    if (pairs.empty()) throw InvalidArgument("train: training alignment is empty");
    const auto& kg = *kgs_;
    const auto n_src = static_cast<EntityId>(kg.source.num_entities());
    const auto n_tgt = static_cast<EntityId>(kg.target.num_entities());
    for (const auto& p : pairs) {
      if (p.source >= n_src || p.target >= n_tgt) throw InvalidArgument("train: pair id outside the graphs");
    }
    std::uniform_int_distribution<EntityId> any_src(0, n_src - 1);
    std::uniform_int_distribution<EntityId> any_tgt(0, n_tgt - 1);
    std::bernoulli_distribution side(0.5);
    std::unordered_map<std::uint32_t, std::uint32_t> counterpart;
    if (config_.swap_aligned) {
      for (const auto& p : pairs) {
        counterpart.emplace(kg.global_source(p.source), kg.global_target(p.target));
        counterpart.emplace(kg.global_target(p.target), kg.global_source(p.source));
      }
    }

    for (int epoch = 0; epoch < epochs; ++epoch) {
      Batch all;
      objective_->structural_samples(rng_, config_.negatives_per_positive, all);
      std::vector<PairSample> pair_samples;
      pair_samples.reserve(pairs.size());
      for (const auto& p : pairs) {
        PairSample s{kg.global_source(p.source), kg.global_target(p.target), {}};
        if (use_negatives && p.provenance == Provenance::seed) {
          for (int k = 0; k < config_.negatives_per_positive; ++k) {
            if (side(rng_)) {
              EntityId t = any_tgt(rng_);
              if (t == p.target) continue;
              s.negatives.emplace_back(s.source, kg.global_target(t));
            } else {
              EntityId x = any_src(rng_);
              if (x == p.source) continue;
              s.negatives.emplace_back(kg.global_source(x), s.target);
            }
          }
        }
        pair_samples.push_back(std::move(s));
      }
      if (config_.swap_aligned) add_swapped(counterpart, all);
      std::shuffle(all.triples.begin(), all.triples.end(), rng_);
      std::shuffle(all.paths.begin(), all.paths.end(), rng_);
      std::shuffle(pair_samples.begin(), pair_samples.end(), rng_);

      const std::size_t total = all.structural_size() + pair_samples.size();
      const std::size_t n_batches =
          std::max<std::size_t>(1, (total + static_cast<std::size_t>(config_.batch_size) - 1) /
                                       static_cast<std::size_t>(config_.batch_size));
      std::vector<Batch> batches(n_batches);
      for (std::size_t i = 0; i < all.triples.size(); ++i) batches[i % n_batches].triples.push_back(std::move(all.triples[i]));
      for (std::size_t i = 0; i < all.paths.size(); ++i) batches[i % n_batches].paths.push_back(std::move(all.paths[i]));
      for (std::size_t i = 0; i < pair_samples.size(); ++i) batches[i % n_batches].pairs.push_back(std::move(pair_samples[i]));

      double epoch_loss = 0.0;
      ModelParams grad = params_.zeros_like();
      for (const auto& b : batches) {
        std::fill(grad.table.data().begin(), grad.table.data().end(), 0.0);
        std::fill(grad.extra.begin(), grad.extra.end(), 0.0);
        epoch_loss += objective_->accumulate(params_, b, &grad);
        clip(grad.extra, config_.clip_norm);
        step(grad);
      }
      ++epochs_;
      if (!std::isfinite(epoch_loss) || !params_.table.all_finite()) {
        throw DivergenceError(std::string(to_string(kind())), epochs_);
      }
      params_.table.normalize_entities();
      loss_history_.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(1, total)));
    }
  }

  // Everything training mutates, for rolling back after divergence.
  struct State {
    ModelParams params;
    ModelParams adagrad;
    std::mt19937_64 rng;
    AlignmentSet training;
    int epochs = 0;
    std::vector<double> loss_history;
  };

  State snapshot() const { return {params_, adagrad_, rng_, training_, epochs_, loss_history_}; }

  void restore(State s) {
    params_ = std::move(s.params);
    adagrad_ = std::move(s.adagrad);
    rng_ = s.rng;
    training_ = std::move(s.training);
    epochs_ = s.epochs;
    loss_history_ = std::move(s.loss_history);
  }

  // Replaces the parameters, e.g. from a checkpoint. Shapes must match.
  void set_params(ModelParams p, int epochs) {
    if (p.table.dim() != params_.table.dim() || p.table.num_entities() != params_.table.num_entities() ||
        p.table.num_relations() != params_.table.num_relations() || p.extra.size() != params_.extra.size()) {
      throw InvalidArgument("set_params: parameter shapes differ from the model");
    }
    params_ = std::move(p);
    epochs_ = epochs;
  }

  // Advances the epoch counter without touching the parameters.
  void skip_epochs(int n) { epochs_ += n; }

  // Trains on the aligner's own accumulated alignment.
  void fit(int epochs, bool use_negatives) { train(training_, epochs, use_negatives); }

  // Alignment representation of a source / target entity.
  Vector source_vector(EntityId e) const { return output(kgs_->global_source(e)); }
  Vector target_vector(EntityId e) const { return output(kgs_->global_target(e)); }

  // Cosine matrix, rows/columns in input order.
  SimilarityView similarity_view(const std::vector<EntityId>& sources, const std::vector<EntityId>& targets) const {
    check_ids(sources, kgs_->source.num_entities(), "source");
    check_ids(targets, kgs_->target.num_entities(), "target");
    std::unordered_map<EntityId, Vector> cache_s, cache_t;
    for (EntityId s : sources) cache_s.emplace(s, source_vector(s));
    for (EntityId t : targets) cache_t.emplace(t, target_vector(t));
    return cosine_view(
        sources, targets, [&](EntityId s) { return ConstVec(cache_s.at(s)); },
        [&](EntityId t) { return ConstVec(cache_t.at(t)); });
  }

  // Hits@1 of nearest-neighbour search among the valid targets.
  double validate(const AlignmentSet& valid) const {
    if (valid.empty()) throw InvalidArgument("validate: empty validation alignment");
    auto view = similarity_view(valid.sources(), valid.targets());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < view.rows(); ++i) hits += gold_rank(view.row(i), i) == 1;
    return static_cast<double>(hits) / static_cast<double>(view.rows());
  }

  // 1 - mean cosine over pairs of the current representations.
  double alignment_loss(const AlignmentSet& pairs) const {
    if (pairs.empty()) throw InvalidArgument("alignment_loss: empty pair set");
    double s = 0.0;
    for (const auto& p : pairs) s += cosine(source_vector(p.source), target_vector(p.target));
    return 1.0 - s / static_cast<double>(pairs.size());
  }

  // Output representations of every entity, source ids first.
  EmbeddingTable outputs() const {
    const std::size_t n = kgs_->num_entities();
    EmbeddingTable t(params_.table.dim(), n, 0);
    for (std::size_t e = 0; e < n; ++e) objective_->embed(params_, static_cast<std::uint32_t>(e), t.entity(e));
    return t;
  }

 private:
  Vector output(std::uint32_t global) const {
    Vector v(params_.table.dim());
    objective_->embed(params_, global, v);
    return v;
  }

  static void check_ids(const std::vector<EntityId>& ids, std::size_t limit, const char* side) {
    for (EntityId id : ids) {
      if (id >= limit) throw InvalidArgument(std::string(side) + " entity id " + std::to_string(id) + " is not embedded");
    }
  }

  // Copies of every structural sample touching an aligned entity, with each
  // aligned entity replaced by its counterpart in the other graph.
  static void add_swapped(const std::unordered_map<std::uint32_t, std::uint32_t>& counterpart, Batch& b) {
    auto swap = [&](std::uint32_t e) {
      auto it = counterpart.find(e);
      return it == counterpart.end() ? e : it->second;
    };
    const std::size_t n_triples = b.triples.size();
    for (std::size_t i = 0; i < n_triples; ++i) {
      const TripleSample& t = b.triples[i];
      const std::uint32_t h = swap(t.head), tl = swap(t.tail);
      if (h == t.head && tl == t.tail) continue;
      TripleSample c{h, t.relation, tl, {}};
      for (auto [nh, nt] : t.negatives) {
        c.negatives.emplace_back(nh == t.head ? h : nh, nt == t.tail ? tl : nt);
      }
      b.triples.push_back(std::move(c));
    }
    const std::size_t n_paths = b.paths.size();
    for (std::size_t i = 0; i < n_paths; ++i) {
      PathSample c = b.paths[i];
      bool changed = false;
      for (std::size_t k = 0; k < c.path.size(); k += 2) {
        std::uint32_t e = swap(c.path[k]);
        changed |= e != c.path[k];
        c.path[k] = e;
      }
      if (changed) b.paths.push_back(std::move(c));
    }
  }

  static void clip(std::vector<double>& g, double max_norm) {
    if (g.empty() || max_norm <= 0.0) return;
    double n = norm2(g);
    if (n > max_norm) {
      for (double& x : g) x *= max_norm / n;
    }
  }

  // Adagrad update; untouched coordinates (zero gradient) do not move.
  void step(const ModelParams& grad) {
    const double lr = config_.learning_rate;
    auto apply = [lr](std::vector<double>& p, std::vector<double>& acc, const std::vector<double>& g) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i] == 0.0) continue;
        acc[i] += g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(acc[i]) + 1e-10);
      }
    };
    apply(params_.table.data(), adagrad_.table.data(), grad.table.data());
    apply(params_.extra, adagrad_.extra, grad.extra);
  }

  std::shared_ptr<const KgPair> kgs_;
  AlignerConfig config_;
  std::mt19937_64 rng_;
  std::unique_ptr<Objective> objective_;
  ModelParams params_;
  ModelParams adagrad_;
  AlignmentSet training_;
  int epochs_ = 0;
  std::vector<double> loss_history_;
};

}  // namespace cyctea
