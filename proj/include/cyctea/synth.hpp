#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "cyctea/kg.hpp"

namespace cyctea {

struct SynthSpec {
  int n_entities = 1000;
  int n_relations = 20;
  double avg_degree = 6.0;  // 2|T| / |E|
  double overlap_ratio = 1.0;
  double structure_noise = 0.0;
  std::uint64_t rng_seed = 1;
};

inline void validate(const SynthSpec& spec) {
  if (spec.n_entities < 10) throw InvalidArgument("n_entities must be >= 10");
  if (spec.n_relations < 1) throw InvalidArgument("n_relations must be >= 1");
  if (!(spec.avg_degree > 0.0)) throw InvalidArgument("avg_degree must be positive");
  if (!(spec.overlap_ratio > 0.0 && spec.overlap_ratio <= 1.0))
    throw InvalidArgument("overlap_ratio must be in (0, 1]");
  if (!(spec.structure_noise >= 0.0 && spec.structure_noise < 1.0))
    throw InvalidArgument("structure_noise must be in [0, 1)");
}

struct SyntheticPair {
  Kg source;
  Kg target;
  AlignmentSet gold;
};

// Builds a random source graph by degree-biased attachment, copies it under a
// random renaming, rewires exactly floor(noise * |T|) copied triples and keeps
// round(overlap * n) renamed entities as the gold alignment.
inline SyntheticPair generate_synthetic_pair(const SynthSpec& spec) {
  validate(spec);
  const auto n = static_cast<std::size_t>(spec.n_entities);
  const auto m = static_cast<std::size_t>(spec.n_relations);
  std::mt19937_64 rng(derive_seed(spec.rng_seed, "synth"));

  // Zipf-like relation frequencies.
  std::vector<double> rel_weights(m);
  for (std::size_t r = 0; r < m; ++r) rel_weights[r] = 1.0 / static_cast<double>(r + 1);
  std::discrete_distribution<std::size_t> pick_relation(rel_weights.begin(), rel_weights.end());
  std::bernoulli_distribution coin(0.5);

  const std::size_t max_triples = n * (n - 1) * m;
  std::size_t wanted = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.avg_degree / 2.0));
  wanted = std::clamp(wanted, n - 1, max_triples);

  std::vector<Triple> triples;
  std::unordered_set<Triple, TripleHash> seen;
  // Sampling uniformly from `bag` picks an entity with probability ∝ degree + 1.
  std::vector<EntityId> bag{0};
  auto sample_bag = [&] { return bag[std::uniform_int_distribution<std::size_t>(0, bag.size() - 1)(rng)]; };

  for (EntityId e = 1; e < n; ++e) {
    EntityId other = sample_bag();
    auto r = static_cast<RelationId>(pick_relation(rng));
    Triple t = coin(rng) ? Triple{e, r, other} : Triple{other, r, e};
    seen.insert(t);
    triples.push_back(t);
    bag.push_back(e);
    bag.push_back(other);
    bag.push_back(e);
  }
  std::uniform_int_distribution<EntityId> any_entity(0, static_cast<EntityId>(n - 1));
  std::size_t attempts = 0;
  while (triples.size() < wanted && attempts < 50 * wanted) {
    ++attempts;
    EntityId h = sample_bag();
    EntityId t = coin(rng) ? sample_bag() : any_entity(rng);
    if (h == t) continue;
    Triple tr{h, static_cast<RelationId>(pick_relation(rng)), t};
    if (!seen.insert(tr).second) continue;
    triples.push_back(tr);
    bag.push_back(h);
    bag.push_back(t);
  }

  KgBuilder src;
  for (std::size_t e = 0; e < n; ++e) src.intern_entity("e" + std::to_string(e));
  for (std::size_t r = 0; r < m; ++r) src.intern_relation("r" + std::to_string(r));
  for (const auto& t : triples) src.add(t);

  std::vector<EntityId> ent_perm(n);
  std::iota(ent_perm.begin(), ent_perm.end(), 0);
  std::shuffle(ent_perm.begin(), ent_perm.end(), rng);
  std::vector<RelationId> rel_perm(m);
  std::iota(rel_perm.begin(), rel_perm.end(), 0);
  std::shuffle(rel_perm.begin(), rel_perm.end(), rng);

  std::vector<Triple> copied;
  copied.reserve(triples.size());
  std::unordered_set<Triple, TripleHash> mapped_source;
  for (const auto& t : triples) {
    Triple c{ent_perm[t.head], rel_perm[t.relation], ent_perm[t.tail]};
    copied.push_back(c);
    mapped_source.insert(c);
  }

  const auto n_noisy =
      static_cast<std::size_t>(std::floor(spec.structure_noise * static_cast<double>(copied.size())));
  std::vector<std::size_t> order(copied.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> noisy(copied.size(), 0);
  for (std::size_t i = 0; i < n_noisy; ++i) noisy[order[i]] = 1;

  std::unordered_set<Triple, TripleHash> target_set;
  for (std::size_t i = 0; i < copied.size(); ++i) {
    if (!noisy[i]) target_set.insert(copied[i]);
  }
  for (std::size_t i = 0; i < copied.size(); ++i) {
    if (!noisy[i]) continue;
    Triple t = copied[i];
    while (true) {
      Triple cand = t;
      (coin(rng) ? cand.head : cand.tail) = any_entity(rng);
      if (cand.head == cand.tail || mapped_source.count(cand) || target_set.count(cand)) continue;
      copied[i] = cand;
      target_set.insert(cand);
      break;
    }
  }
  std::shuffle(copied.begin(), copied.end(), rng);

  KgBuilder tgt;
  for (std::size_t e = 0; e < n; ++e) tgt.intern_entity("t" + std::to_string(e));
  for (std::size_t r = 0; r < m; ++r) tgt.intern_relation("q" + std::to_string(r));
  for (const auto& t : copied) tgt.add(t);

  std::vector<EntityId> shared(n);
  std::iota(shared.begin(), shared.end(), 0);
  std::shuffle(shared.begin(), shared.end(), rng);
  auto n_shared = static_cast<std::size_t>(std::llround(spec.overlap_ratio * static_cast<double>(n)));
  n_shared = std::clamp<std::size_t>(n_shared, 1, n);
  shared.resize(n_shared);
  std::sort(shared.begin(), shared.end());

  SyntheticPair out{std::move(src).build(), std::move(tgt).build(), {}};
  for (EntityId e : shared) out.gold.insert(e, ent_perm[e]);
  return out;
}

// Randomly partitions a reference alignment into train/valid/test.
inline SplitSet split_alignment(const AlignmentSet& reference, double train_ratio,
                                double valid_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0) || valid_ratio < 0.0 || train_ratio + valid_ratio >= 1.0) {
    throw InvalidArgument("split ratios must satisfy train > 0, valid >= 0, train + valid < 1");
  }
  std::vector<AlignedPair> pairs = reference.pairs();
  std::mt19937_64 rng(derive_seed(seed, "split"));
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto total = static_cast<double>(pairs.size());
  const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * total));
  const auto n_valid = static_cast<std::size_t>(std::llround(valid_ratio * total));
  SplitSet s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (i < n_train) {
      s.train.insert(p.source, p.target, Provenance::seed, 1.0);
    } else if (i < n_train + n_valid) {
      s.valid.insert(p.source, p.target, Provenance::seed, 1.0);
    } else {
      s.test.insert(p.source, p.target, Provenance::seed, 1.0);
    }
  }
  return s;
}

}  // namespace cyctea
