#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cyctea/embedding.hpp"
#include "cyctea/kg.hpp"
#include "cyctea/walk.hpp"

namespace cyctea {

enum class ModelKind { translational, neighborhood, path_skip };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::translational: return "translational";
    case ModelKind::neighborhood: return "neighborhood";
    case ModelKind::path_skip: return "path_skip";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "translational") return ModelKind::translational;
  if (s == "neighborhood") return ModelKind::neighborhood;
  if (s == "path_skip") return ModelKind::path_skip;
  throw InvalidArgument("unknown model kind '" + std::string(s) + "'");
}

struct AlignerConfig {
  ModelKind model_kind = ModelKind::translational;
  int dim = 32;
  double learning_rate = 0.1;
  double margin = 1.0;
  int negatives_per_positive = 5;
  int base_epochs = 200;
  int semi_epochs = 20;
  std::uint64_t rng_seed = 1;

  double align_weight = 20.0;  // weight of the 1 - cos term per pair
  double align_margin = 0.5;   // hinge margin of alignment negatives
  int batch_size = 1024;
  int walk_length = 5;
  int walks_per_entity = 1;   // resampled every epoch
  double walk_bias = 0.5;
  double clip_norm = 5.0;
  bool swap_aligned = true;    // add copies of triples/walks with aligned entities exchanged
};

inline void validate(const AlignerConfig& c) {
  if (c.dim < 4) throw InvalidArgument("aligner dim must be >= 4");
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (c.margin < 0.0) throw InvalidArgument("margin must be >= 0");
  if (c.negatives_per_positive < 0) throw InvalidArgument("negatives_per_positive must be >= 0");
  if (c.base_epochs < 1) throw InvalidArgument("base_epochs must be >= 1");
  if (c.semi_epochs < 0 || c.semi_epochs > c.base_epochs)
    throw InvalidArgument("semi_epochs must be in [0, base_epochs]");
  if (c.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
}

// The source and target graph of one alignment task. Entities and relations
// of both graphs share one global index space: source ids come first.
struct KgPair {
  Kg source;
  Kg target;

  std::size_t num_entities() const { return source.num_entities() + target.num_entities(); }
  std::uint32_t global_source(EntityId e) const { return e; }
  std::uint32_t global_target(EntityId e) const {
    return static_cast<std::uint32_t>(source.num_entities()) + e;
  }
};

// All trainable state of a model. `extra` holds dense model-specific weights.
struct ModelParams {
  EmbeddingTable table;
  std::vector<double> extra;

  ModelParams zeros_like() const {
    ModelParams z{EmbeddingTable(table.dim(), table.num_entities(), table.num_relations()), {}};
    z.extra.assign(extra.size(), 0.0);
    return z;
  }
};

struct TripleSample {
  std::uint32_t head;
  std::uint32_t relation;
  std::uint32_t tail;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> negatives;  // corrupted (head, tail)
};

struct PairSample {
  std::uint32_t source;
  std::uint32_t target;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> negatives;  // corrupted (source, target)
};

struct PathSample {
  Path path;  // global ids
  std::vector<std::vector<std::uint32_t>> negatives;  // per relation position
};

struct Batch {
  std::vector<TripleSample> triples;
  std::vector<PairSample> pairs;
  std::vector<PathSample> paths;

  std::size_t structural_size() const { return triples.size() + paths.size(); }
};

namespace detail {

// 1 - cos(x, y) per positive pair plus hinge terms
// max(0, cos(x', y') - cos(x, y) + margin) for each negative.
template <typename Out, typename GradOut>
double alignment_terms(const std::vector<PairSample>& pairs, double weight, double margin, Out&& out,
                       GradOut&& grad_out, bool want_grad) {
  double loss = 0.0;
  std::size_t dim = 0;
  std::vector<double> scratch_x, scratch_y;
  for (const auto& p : pairs) {
    ConstVec x = out(p.source);
    ConstVec y = out(p.target);
    dim = x.size();
    scratch_x.assign(dim, 0.0);
    scratch_y.assign(dim, 0.0);
    double c = cosine_with_grad(x, y, 1.0, scratch_x, scratch_y);
    loss += weight * (1.0 - c);
    if (want_grad) {
      axpy(-weight, scratch_x, grad_out(p.source));
      axpy(-weight, scratch_y, grad_out(p.target));
    }
    for (const auto& [nx, ny] : p.negatives) {
      ConstVec a = out(nx);
      ConstVec b = out(ny);
      std::vector<double> ga(dim, 0.0), gb(dim, 0.0);
      double cn = cosine_with_grad(a, b, 1.0, ga, gb);
      double h = cn - c + margin;
      if (h <= 0.0) continue;
      loss += h;
      if (want_grad) {
        axpy(1.0, ga, grad_out(nx));
        axpy(1.0, gb, grad_out(ny));
        axpy(-1.0, scratch_x, grad_out(p.source));
        axpy(-1.0, scratch_y, grad_out(p.target));
      }
    }
  }
  return loss;
}

// Uniformly corrupt one side of a triple; avoids known positives when it can.
inline std::pair<EntityId, EntityId> corrupt(const Kg& kg, const Triple& t, std::mt19937_64& rng) {
  std::uniform_int_distribution<EntityId> any(0, static_cast<EntityId>(kg.num_entities() - 1));
  std::bernoulli_distribution side(0.5);
  Triple c = t;
  for (int attempt = 0; attempt < 10; ++attempt) {
    c = t;
    (side(rng) ? c.head : c.tail) = any(rng);
    if (c != t && !kg.contains(c)) break;
  }
  return {c.head, c.tail};
}

}  // namespace detail

// Training objective of one aligner family: structural loss plus alignment
// loss, with hand-written gradients.
class Objective {
 public:
  explicit Objective(std::shared_ptr<const KgPair> kgs) : kgs_(std::move(kgs)) {}
  virtual ~Objective() = default;

  virtual ModelKind kind() const = 0;
  virtual ModelParams init(std::size_t dim, std::mt19937_64& rng) const = 0;

  // Loss over the batch; adds the gradient into *grad when it is non-null.
  virtual double accumulate(const ModelParams& params, const Batch& batch, ModelParams* grad) const = 0;

  // The representation that alignment and similarity operate on.
  virtual void embed(const ModelParams& params, std::uint32_t entity, MutVec out) const = 0;

  // Structural samples for one epoch, with negatives.
  virtual void structural_samples(std::mt19937_64& rng, int negatives, Batch& into) const = 0;

  const KgPair& kgs() const { return *kgs_; }

  double align_weight = 1.0;
  double align_margin = 0.5;
  double margin = 1.0;

 protected:
  // Triples of both graphs in global ids with corrupted copies.
  void triple_samples(std::mt19937_64& rng, int negatives, Batch& into) const {
    auto add = [&](const Kg& kg, std::uint32_t ent_off, std::uint32_t rel_off) {
      for (const auto& t : kg.triples()) {
        TripleSample s{t.head + ent_off, t.relation + rel_off, t.tail + ent_off, {}};
        for (int k = 0; k < negatives; ++k) {
          auto [h, tl] = detail::corrupt(kg, t, rng);
          s.negatives.emplace_back(h + ent_off, tl + ent_off);
        }
        into.triples.push_back(std::move(s));
      }
    };
    add(kgs_->source, 0, 0);
    add(kgs_->target, static_cast<std::uint32_t>(kgs_->source.num_entities()),
        static_cast<std::uint32_t>(kgs_->source.num_relations()));
  }

  std::shared_ptr<const KgPair> kgs_;
};

// TransE-style: minimise ||h + r - t||_2 under a margin ranking loss; the
// entity rows are the alignment representation.
class TranslationalObjective : public Objective {
 public:
  using Objective::Objective;

  ModelKind kind() const override { return ModelKind::translational; }

  ModelParams init(std::size_t dim, std::mt19937_64& rng) const override {
    ModelParams p{EmbeddingTable(dim, kgs_->num_entities(),
                                 kgs_->source.num_relations() + kgs_->target.num_relations()),
                  {}};
    p.table.randomize(rng);
    return p;
  }

  double accumulate(const ModelParams& p, const Batch& batch, ModelParams* g) const override {
    const std::size_t dim = p.table.dim();
    std::vector<double> d(dim), dn(dim);
    double loss = 0.0;
    auto residual = [&](std::uint32_t h, std::uint32_t r, std::uint32_t t, std::vector<double>& out) {
      ConstVec vh = p.table.entity(h), vr = p.table.relation(r), vt = p.table.entity(t);
      for (std::size_t i = 0; i < dim; ++i) out[i] = vh[i] + vr[i] - vt[i];
      return norm2(out);
    };
    auto push_grad = [&](std::uint32_t h, std::uint32_t r, std::uint32_t t, const std::vector<double>& res,
                         double e, double sign) {
      if (e == 0.0) return;
      double s = sign / e;
      axpy(s, res, g->table.entity(h));
      axpy(s, res, g->table.relation(r));
      axpy(-s, res, g->table.entity(t));
    };
    for (const auto& s : batch.triples) {
      double ep = residual(s.head, s.relation, s.tail, d);
      for (const auto& [nh, nt] : s.negatives) {
        double en = residual(nh, s.relation, nt, dn);
        double l = margin + ep - en;
        if (l <= 0.0) continue;
        loss += l;
        if (g) {
          push_grad(s.head, s.relation, s.tail, d, ep, 1.0);
          push_grad(nh, s.relation, nt, dn, en, -1.0);
        }
      }
    }
    loss += detail::alignment_terms(
        batch.pairs, align_weight, align_margin, [&](std::uint32_t e) { return p.table.entity(e); },
        [&](std::uint32_t e) { return g->table.entity(e); }, g != nullptr);
    return loss;
  }

  void embed(const ModelParams& p, std::uint32_t e, MutVec out) const override {
    ConstVec v = p.table.entity(e);
    std::copy(v.begin(), v.end(), out.begin());
  }

  void structural_samples(std::mt19937_64& rng, int negatives, Batch& into) const override {
    triple_samples(rng, negatives, into);
  }
};

// One-layer neighbourhood aggregation: f(e) = 0.5 e + 0.5 mean(neighbours),
// trained with a translational energy on the aggregated outputs.
class NeighborhoodObjective : public Objective {
 public:
  explicit NeighborhoodObjective(std::shared_ptr<const KgPair> kgs) : Objective(std::move(kgs)) {
    neighbors_.resize(kgs_->num_entities());
    auto add = [&](const Kg& kg, std::uint32_t off) {
      for (EntityId e = 0; e < kg.num_entities(); ++e) {
        auto& n = neighbors_[e + off];
        for (const auto& edge : kg.out_edges(e)) n.push_back(edge.neighbor + off);
        for (const auto& edge : kg.in_edges(e)) n.push_back(edge.neighbor + off);
      }
    };
    add(kgs_->source, 0);
    add(kgs_->target, static_cast<std::uint32_t>(kgs_->source.num_entities()));
  }

  ModelKind kind() const override { return ModelKind::neighborhood; }

  ModelParams init(std::size_t dim, std::mt19937_64& rng) const override {
    ModelParams p{EmbeddingTable(dim, kgs_->num_entities(),
                                 kgs_->source.num_relations() + kgs_->target.num_relations()),
                  {}};
    p.table.randomize(rng);
    return p;
  }

  void embed(const ModelParams& p, std::uint32_t e, MutVec out) const override {
    aggregate(p.table, e, out);
  }

  void aggregate(const EmbeddingTable& table, std::uint32_t e, MutVec out) const {
    ConstVec self = table.entity(e);
    const auto& n = neighbors_[e];
    if (n.empty()) {
      std::copy(self.begin(), self.end(), out.begin());
      return;
    }
    const double w = 0.5 / static_cast<double>(n.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * self[i];
    for (std::uint32_t u : n) axpy(w, table.entity(u), out);
  }

  double accumulate(const ModelParams& p, const Batch& batch, ModelParams* g) const override {
    const std::size_t dim = p.table.dim();
    const std::size_t n = kgs_->num_entities();
    std::vector<double> out(n * dim);
    std::vector<char> ready(n, 0);
    std::vector<double> gout;
    std::vector<char> touched;
    if (g) {
      gout.assign(n * dim, 0.0);
      touched.assign(n, 0);
    }
    auto f = [&](std::uint32_t e) -> ConstVec {
      MutVec row{out.data() + std::size_t{e} * dim, dim};
      if (!ready[e]) {
        aggregate(p.table, e, row);
        ready[e] = 1;
      }
      return row;
    };
    auto gf = [&](std::uint32_t e) -> MutVec {
      touched[e] = 1;
      return {gout.data() + std::size_t{e} * dim, dim};
    };

    std::vector<double> d(dim), dn(dim);
    auto residual = [&](std::uint32_t h, std::uint32_t r, std::uint32_t t, std::vector<double>& res) {
      ConstVec vh = f(h), vt = f(t), vr = p.table.relation(r);
      for (std::size_t i = 0; i < dim; ++i) res[i] = vh[i] + vr[i] - vt[i];
      return norm2(res);
    };
    auto push = [&](std::uint32_t h, std::uint32_t r, std::uint32_t t, const std::vector<double>& res, double e,
                    double sign) {
      if (e == 0.0) return;
      double s = sign / e;
      axpy(s, res, gf(h));
      axpy(s, res, g->table.relation(r));
      axpy(-s, res, gf(t));
    };

    double loss = 0.0;
    for (const auto& s : batch.triples) {
      double ep = residual(s.head, s.relation, s.tail, d);
      for (const auto& [nh, nt] : s.negatives) {
        double en = residual(nh, s.relation, nt, dn);
        double l = margin + ep - en;
        if (l <= 0.0) continue;
        loss += l;
        if (g) {
          push(s.head, s.relation, s.tail, d, ep, 1.0);
          push(nh, s.relation, nt, dn, en, -1.0);
        }
      }
    }
    loss += detail::alignment_terms(batch.pairs, align_weight, align_margin, f, gf, g != nullptr);

    if (g) {
      for (std::uint32_t e = 0; e < n; ++e) {
        if (!touched[e]) continue;
        ConstVec ge{gout.data() + std::size_t{e} * dim, dim};
        const auto& nb = neighbors_[e];
        if (nb.empty()) {
          axpy(1.0, ge, g->table.entity(e));
          continue;
        }
        axpy(0.5, ge, g->table.entity(e));
        const double w = 0.5 / static_cast<double>(nb.size());
        for (std::uint32_t u : nb) axpy(w, ge, g->table.entity(u));
      }
    }
    return loss;
  }

  void structural_samples(std::mt19937_64& rng, int negatives, Batch& into) const override {
    triple_samples(rng, negatives, into);
  }

 private:
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

// Weights of the recurrent path encoder, stored in ModelParams::extra as
// [W_state | W_input | S_state | S_input | b].
struct PathSkipParams {
  std::size_t dim = 0;
  const double* w_state = nullptr;
  const double* w_input = nullptr;
  const double* s_state = nullptr;
  const double* s_input = nullptr;
  const double* bias = nullptr;

  static std::size_t size(std::size_t dim) { return 4 * dim * dim + dim; }

  static PathSkipParams view(const std::vector<double>& extra, std::size_t dim) {
    if (extra.size() != size(dim)) throw InvalidArgument("path-skip parameter block has wrong size");
    const double* base = extra.data();
    const std::size_t m = dim * dim;
    return {dim, base, base + m, base + 2 * m, base + 3 * m, base + 4 * m};
  }
};

namespace detail {

struct PathTrace {
  std::vector<Vector> pre;    // W o_{i-1} + W x_i + b
  std::vector<Vector> state;  // o_i
  std::vector<Vector> out;    // o'_i
};

template <typename Row>
PathTrace run_path_skip(const Path& path, Row&& row, const PathSkipParams& w) {
  const std::size_t dim = w.dim;
  PathTrace tr;
  Vector prev(dim, 0.0);
  for (std::size_t i = 0; i < path.size(); ++i) {
    ConstVec x = row(i);
    Vector a(w.bias, w.bias + dim);
    gemv_add(w.w_state, dim, dim, prev, a);
    gemv_add(w.w_input, dim, dim, x, a);
    Vector o(dim);
    for (std::size_t k = 0; k < dim; ++k) o[k] = std::tanh(a[k]);
    Vector op = o;
    if (i % 2 == 1) {
      std::fill(op.begin(), op.end(), 0.0);
      gemv_add(w.s_state, dim, dim, o, op);
      gemv_add(w.s_input, dim, dim, row(i - 1), op);
    }
    tr.pre.push_back(std::move(a));
    prev = o;
    tr.state.push_back(std::move(o));
    tr.out.push_back(std::move(op));
  }
  return tr;
}

}  // namespace detail

// Encodes an alternating entity/relation path with the skip recurrence and
// returns the output at the last position.
inline Vector encode_path_skip(const Path& path, const EmbeddingTable& table, const PathSkipParams& w) {
  if (path.empty()) throw InvalidArgument("encode_path_skip: empty path");
  for (std::size_t i = 0; i < path.size(); ++i) {
    bool is_rel = i % 2 == 1;
    std::size_t limit = is_rel ? table.num_relations() : table.num_entities();
    if (path[i] >= limit) {
      throw InvalidArgument(std::string("encode_path_skip: ") + (is_rel ? "relation" : "entity") + " id " +
                            std::to_string(path[i]) + " is not in the embedding table");
    }
  }
  auto tr = detail::run_path_skip(
      path, [&](std::size_t i) { return i % 2 == 1 ? table.relation(path[i]) : table.entity(path[i]); }, w);
  return tr.out.back();
}

// Recurrent skipping network over random walks: at each relation position the
// output o'_i = S_state o_i + S_input x_{i-1} should land on the next entity.
class PathSkipObjective : public Objective {
 public:
  PathSkipObjective(std::shared_ptr<const KgPair> kgs, int walk_length, int walks_per_entity, double bias)
      : Objective(std::move(kgs)), walk_length_(walk_length), walks_per_entity_(walks_per_entity), bias_(bias) {
    src_ = with_inverse_relations(kgs_->source);
    tgt_ = with_inverse_relations(kgs_->target);
  }

  // Fresh walks over both graphs in global ids; paths shorter than one
  // triple are dropped.
  std::vector<Path> sample_paths(std::uint64_t seed) const {
    std::vector<Path> out;
    auto add = [&](const Kg& kg, std::uint32_t ent_off, std::uint32_t rel_off, std::uint64_t s) {
      for (auto& path : random_walk_paths(kg, walk_length_, walks_per_entity_, bias_, s)) {
        if (path.size() < 3) continue;
        for (std::size_t i = 0; i < path.size(); ++i) path[i] += i % 2 == 1 ? rel_off : ent_off;
        out.push_back(std::move(path));
      }
    };
    add(src_, 0, 0, derive_seed(seed, "walks/source"));
    add(tgt_, static_cast<std::uint32_t>(kgs_->source.num_entities()),
        static_cast<std::uint32_t>(src_.num_relations()), derive_seed(seed, "walks/target"));
    return out;
  }

  ModelKind kind() const override { return ModelKind::path_skip; }

  ModelParams init(std::size_t dim, std::mt19937_64& rng) const override {
    ModelParams p{EmbeddingTable(dim, kgs_->num_entities(), src_.num_relations() + tgt_.num_relations()), {}};
    p.table.randomize(rng);
    p.extra.assign(PathSkipParams::size(dim), 0.0);
    const std::size_t m = dim * dim;
    std::normal_distribution<double> small(0.0, 0.1 / std::sqrt(static_cast<double>(dim)));
    for (std::size_t i = 0; i < m; ++i) p.extra[i] = small(rng);
    for (std::size_t k = 0; k < dim; ++k) {
      p.extra[m + k * dim + k] = 1.0;      // W_input
      p.extra[2 * m + k * dim + k] = 1.0;  // S_state
      p.extra[3 * m + k * dim + k] = 1.0;  // S_input
    }
    return p;
  }

  void embed(const ModelParams& p, std::uint32_t e, MutVec out) const override {
    ConstVec v = p.table.entity(e);
    std::copy(v.begin(), v.end(), out.begin());
  }

  double accumulate(const ModelParams& p, const Batch& batch, ModelParams* g) const override {
    const std::size_t dim = p.table.dim();
    const std::size_t m = dim * dim;
    const PathSkipParams w = PathSkipParams::view(p.extra, dim);
    double loss = 0.0;
    Vector d(dim), dn(dim), ga(dim), go(dim);

    for (const auto& s : batch.paths) {
      const Path& path = s.path;
      // The last position only matters when a prediction is made from it.
      std::size_t len = path.size() % 2 == 1 ? path.size() - 1 : path.size();
      Path used(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(len));
      auto row = [&](std::size_t i) { return i % 2 == 1 ? p.table.relation(used[i]) : p.table.entity(used[i]); };
      auto tr = detail::run_path_skip(used, row, w);

      std::vector<Vector> g_out(len, Vector(dim, 0.0));
      std::size_t step = 0;
      for (std::size_t i = 1; i < len; i += 2, ++step) {
        ConstVec next = p.table.entity(path[i + 1]);
        for (std::size_t k = 0; k < dim; ++k) d[k] = tr.out[i][k] - next[k];
        double ep = norm2(d);
        if (step >= s.negatives.size()) continue;
        for (std::uint32_t neg : s.negatives[step]) {
          ConstVec nv = p.table.entity(neg);
          for (std::size_t k = 0; k < dim; ++k) dn[k] = tr.out[i][k] - nv[k];
          double en = norm2(dn);
          double l = margin + ep - en;
          if (l <= 0.0) continue;
          loss += l;
          if (!g) continue;
          if (ep > 0.0) {
            axpy(1.0 / ep, d, g_out[i]);
            axpy(-1.0 / ep, d, g->table.entity(path[i + 1]));
          }
          if (en > 0.0) {
            axpy(-1.0 / en, dn, g_out[i]);
            axpy(1.0 / en, dn, g->table.entity(neg));
          }
        }
      }
      if (!g) continue;

      double* gw_state = g->extra.data();
      double* gw_input = gw_state + m;
      double* gs_state = gw_state + 2 * m;
      double* gs_input = gw_state + 3 * m;
      double* gb = gw_state + 4 * m;
      auto grad_row = [&](std::size_t i) {
        return i % 2 == 1 ? g->table.relation(used[i]) : g->table.entity(used[i]);
      };
      std::fill(go.begin(), go.end(), 0.0);  // gradient flowing into o_i from o_{i+1}
      for (std::size_t ii = len; ii-- > 0;) {
        // dL/do_i = recurrent part + output part
        Vector g_state = go;
        if (ii % 2 == 1) {
          gemv_t_add(w.s_state, dim, dim, g_out[ii], g_state);
          ger_add(gs_state, dim, dim, g_out[ii], tr.state[ii]);
          ger_add(gs_input, dim, dim, g_out[ii], row(ii - 1));
          gemv_t_add(w.s_input, dim, dim, g_out[ii], grad_row(ii - 1));
        } else {
          axpy(1.0, g_out[ii], g_state);
        }
        for (std::size_t k = 0; k < dim; ++k) ga[k] = g_state[k] * (1.0 - tr.state[ii][k] * tr.state[ii][k]);
        for (std::size_t k = 0; k < dim; ++k) gb[k] += ga[k];
        ger_add(gw_input, dim, dim, ga, row(ii));
        gemv_t_add(w.w_input, dim, dim, ga, grad_row(ii));
        std::fill(go.begin(), go.end(), 0.0);
        if (ii > 0) {
          ger_add(gw_state, dim, dim, ga, tr.state[ii - 1]);
          gemv_t_add(w.w_state, dim, dim, ga, go);
        }
      }
    }

    loss += detail::alignment_terms(
        batch.pairs, align_weight, align_margin, [&](std::uint32_t e) { return p.table.entity(e); },
        [&](std::uint32_t e) { return g->table.entity(e); }, g != nullptr);
    return loss;
  }

  void structural_samples(std::mt19937_64& rng, int negatives, Batch& into) const override {
    const auto off = static_cast<std::uint32_t>(kgs_->source.num_entities());
    const auto rel_off = static_cast<std::uint32_t>(src_.num_relations());
    for (const auto& path : sample_paths(rng())) {
      const bool is_target = path[0] >= off;
      const Kg& kg = is_target ? tgt_ : src_;
      const std::uint32_t eo = is_target ? off : 0;
      const std::uint32_t ro = is_target ? rel_off : 0;
      PathSample s{path, {}};
      for (std::size_t i = 1; i + 1 < path.size(); i += 2) {
        Triple t{path[i - 1] - eo, path[i] - ro, path[i + 1] - eo};
        std::vector<std::uint32_t> negs;
        for (int k = 0; k < negatives; ++k) {
          std::uniform_int_distribution<EntityId> any(0, static_cast<EntityId>(kg.num_entities() - 1));
          EntityId c = any(rng);
          for (int attempt = 0; attempt < 10 && (c == t.tail || kg.contains({t.head, t.relation, c})); ++attempt) {
            c = any(rng);
          }
          negs.push_back(c + eo);
        }
        s.negatives.push_back(std::move(negs));
      }
      into.paths.push_back(std::move(s));
    }
  }

 private:
  int walk_length_;
  int walks_per_entity_;
  double bias_;
  Kg src_;
  Kg tgt_;
};

inline std::unique_ptr<Objective> make_objective(const AlignerConfig& c, std::shared_ptr<const KgPair> kgs) {
  std::unique_ptr<Objective> obj;
  switch (c.model_kind) {
    case ModelKind::translational: obj = std::make_unique<TranslationalObjective>(std::move(kgs)); break;
    case ModelKind::neighborhood: obj = std::make_unique<NeighborhoodObjective>(std::move(kgs)); break;
    case ModelKind::path_skip:
      obj = std::make_unique<PathSkipObjective>(std::move(kgs), c.walk_length, c.walks_per_entity, c.walk_bias);
      break;
  }
  obj->align_weight = c.align_weight;
  obj->align_margin = c.align_margin;
  obj->margin = c.margin;
  return obj;
}

// Convenience: comb(e, agg(N_e)) with the mean aggregator and equal weights,
// for callers that hold a plain table and graph.
inline Vector aggregate_neighborhood(EntityId e, const EmbeddingTable& table, const Kg& kg) {
  ConstVec self = table.entity(e);
  Vector out(self.begin(), self.end());
  const auto& outs = kg.out_edges(e);
  const auto& ins = kg.in_edges(e);
  const std::size_t n = outs.size() + ins.size();
  if (n == 0) return out;
  Vector mean(table.dim(), 0.0);
  for (const auto& edge : outs) axpy(1.0, table.entity(edge.neighbor), mean);
  for (const auto& edge : ins) axpy(1.0, table.entity(edge.neighbor), mean);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * self[i] + 0.5 * mean[i] / static_cast<double>(n);
  return out;
}

}  // namespace cyctea
