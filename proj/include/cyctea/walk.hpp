#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "cyctea/kg.hpp"

namespace cyctea {

// Alternating entity / relation ids: e0 r0 e1 r1 e2 ...
using Path = std::vector<std::uint32_t>;

// Biased random walks along out-edges. With probability `bias` a step prefers
// neighbours not yet on the path; otherwise it picks any out-edge uniformly.
// Walks stop early at entities without out-edges.
inline std::vector<Path> random_walk_paths(const Kg& kg, int walk_length, int walks_per_entity,
                                           double bias, std::uint64_t rng_seed) {
  if (walk_length < 3 || walk_length % 2 == 0) {
    throw InvalidArgument("walk_length must be odd and >= 3");
  }
  if (walks_per_entity < 1) throw InvalidArgument("walks_per_entity must be >= 1");
  if (!(bias >= 0.0 && bias <= 1.0)) throw InvalidArgument("bias must be in [0, 1]");

  std::mt19937_64 rng(derive_seed(rng_seed, "walk"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Path> paths;
  paths.reserve(kg.num_entities() * static_cast<std::size_t>(walks_per_entity));
  std::vector<const Edge*> fresh;
  std::unordered_set<EntityId> visited;

  for (EntityId start = 0; start < kg.num_entities(); ++start) {
    for (int w = 0; w < walks_per_entity; ++w) {
      Path path{start};
      visited.clear();
      visited.insert(start);
      EntityId current = start;
      while (static_cast<int>(path.size()) < walk_length) {
        const auto& edges = kg.out_edges(current);
        if (edges.empty()) break;
        const Edge* step = nullptr;
        if (unit(rng) < bias) {
          fresh.clear();
          for (const auto& e : edges) {
            if (!visited.count(e.neighbor)) fresh.push_back(&e);
          }
          if (!fresh.empty()) {
            step = fresh[std::uniform_int_distribution<std::size_t>(0, fresh.size() - 1)(rng)];
          }
        }
        if (step == nullptr) {
          step = &edges[std::uniform_int_distribution<std::size_t>(0, edges.size() - 1)(rng)];
        }
        path.push_back(step->relation);
        path.push_back(step->neighbor);
        visited.insert(step->neighbor);
        current = step->neighbor;
      }
      paths.push_back(std::move(path));
    }
  }
  return paths;
}

// Same entities, plus an inverse relation `name^-1` (id r + |R|) for every
// triple, so walks can traverse edges in both directions.
inline Kg with_inverse_relations(const Kg& kg) {
  KgBuilder b;
  for (EntityId e = 0; e < kg.num_entities(); ++e) b.intern_entity(kg.entity_name(e));
  const auto m = static_cast<RelationId>(kg.num_relations());
  for (RelationId r = 0; r < m; ++r) b.intern_relation(kg.relation_name(r));
  for (RelationId r = 0; r < m; ++r) b.intern_relation(kg.relation_name(r) + "^-1");
  for (const auto& t : kg.triples()) b.add(t);
  for (const auto& t : kg.triples()) b.add(Triple{t.tail, t.relation + m, t.head});
  return std::move(b).build();
}

}  // namespace cyctea
