#include <gtest/gtest.h>

#include <random>

#include "cyctea/synth.hpp"
#include "cyctea/walk.hpp"
#include "toy.hpp"

using namespace cyctea;

namespace {

void expect_valid_walk(const Kg& kg, const Path& p, int walk_length) {
  ASSERT_FALSE(p.empty());
  ASSERT_EQ(p.size() % 2, 1u);
  EXPECT_LE(static_cast<int>(p.size()), walk_length);
  for (std::size_t i = 0; i + 2 < p.size(); i += 2) {
    EXPECT_TRUE(kg.contains(Triple{p[i], p[i + 1], p[i + 2]})) << "window at " << i;
  }
  // A short walk must end at a dead end.
  if (static_cast<int>(p.size()) < walk_length) EXPECT_TRUE(kg.out_edges(p.back()).empty());
}

}  // namespace

TEST(RandomWalk, SingleTriple) {
  Kg kg = toy::make_kg({{"a", "r", "b"}});
  auto paths = random_walk_paths(kg, 3, 1, 0.5, 1);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], (Path{0, 0, 1}));
  EXPECT_EQ(paths[1], (Path{1}));  // b has no out-edges
}

TEST(RandomWalk, IsolatedEntityYieldsSingleton) {
  KgBuilder b;
  b.add("a", "r", "b");
  EntityId lone = b.intern_entity("lone");
  Kg kg = std::move(b).build();
  auto paths = random_walk_paths(kg, 5, 1, 1.0, 1);
  EXPECT_EQ(paths[lone], (Path{lone}));
}

TEST(RandomWalk, BiasedChainWalk) {
  Kg kg = toy::make_kg({{"a", "r1", "b"}, {"b", "r2", "c"}, {"b", "back", "a"}});
  const EntityId a = *kg.find_entity("a"), b = *kg.find_entity("b"), c = *kg.find_entity("c");
  const RelationId r1 = *kg.find_relation("r1"), r2 = *kg.find_relation("r2");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto paths = random_walk_paths(kg, 5, 1, 1.0, seed);
    EXPECT_EQ(paths[a], (Path{a, r1, b, r2, c}));
  }
}

TEST(RandomWalk, RejectsBadArguments) {
  Kg kg = toy::make_kg({{"a", "r", "b"}});
  EXPECT_THROW(random_walk_paths(kg, 4, 1, 0.5, 1), InvalidArgument);
  EXPECT_THROW(random_walk_paths(kg, 1, 1, 0.5, 1), InvalidArgument);
  EXPECT_THROW(random_walk_paths(kg, 3, 0, 0.5, 1), InvalidArgument);
  EXPECT_THROW(random_walk_paths(kg, 3, 1, 1.5, 1), InvalidArgument);
}

TEST(RandomWalk, EveryWindowIsATripleOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    SynthSpec s;
    s.n_entities = 60;
    s.n_relations = 4;
    s.avg_degree = 3.0;
    s.rng_seed = rng();
    auto pair = generate_synthetic_pair(s);
    const int len = 3 + 2 * static_cast<int>(rng() % 4);
    const double bias = static_cast<double>(rng() % 11) / 10.0;
    auto paths = random_walk_paths(pair.source, len, 2, bias, rng());
    ASSERT_EQ(paths.size(), pair.source.num_entities() * 2);
    for (const auto& p : paths) expect_valid_walk(pair.source, p, len);
  }
}

TEST(RandomWalk, DeterministicPerSeed) {
  SynthSpec s;
  s.n_entities = 100;
  auto kg = generate_synthetic_pair(s).source;
  EXPECT_EQ(random_walk_paths(kg, 7, 2, 0.5, 9), random_walk_paths(kg, 7, 2, 0.5, 9));
  EXPECT_NE(random_walk_paths(kg, 7, 2, 0.5, 9), random_walk_paths(kg, 7, 2, 0.5, 10));
}

TEST(InverseRelations, DoublesTriplesAndKeepsIds) {
  Kg kg = toy::make_kg({{"a", "r", "b"}, {"b", "s", "c"}});
  Kg inv = with_inverse_relations(kg);
  EXPECT_EQ(inv.num_entities(), kg.num_entities());
  EXPECT_EQ(inv.num_relations(), 4u);
  EXPECT_EQ(inv.num_triples(), 4u);
  EXPECT_EQ(inv.relation_name(2), "r^-1");
  for (const auto& t : kg.triples()) {
    EXPECT_TRUE(inv.contains(t));
    EXPECT_TRUE(inv.contains(Triple{t.tail, t.relation + 2, t.head}));
  }
  // Every entity now has an out-edge, so no walk stops early.
  for (const auto& p : random_walk_paths(inv, 5, 1, 0.5, 1)) EXPECT_EQ(p.size(), 5u);
}
