#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "cyctea/kg.hpp"
#include "toy.hpp"

using namespace cyctea;
namespace fs = std::filesystem;
using toy::TempDir;

namespace {

// Adjacency rebuilt from scratch must reproduce the triple list exactly.
void expect_adjacency_consistent(const Kg& kg) {
  std::multiset<std::tuple<EntityId, RelationId, EntityId>> from_triples, from_out, from_in;
  for (const auto& t : kg.triples()) from_triples.insert({t.head, t.relation, t.tail});
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    for (const auto& ed : kg.out_edges(e)) from_out.insert({e, ed.relation, ed.neighbor});
    for (const auto& ed : kg.in_edges(e)) from_in.insert({ed.neighbor, ed.relation, e});
  }
  EXPECT_EQ(from_triples, from_out);
  EXPECT_EQ(from_triples, from_in);
  std::set<std::tuple<EntityId, RelationId, EntityId>> unique(from_triples.begin(), from_triples.end());
  EXPECT_EQ(unique.size(), kg.num_triples());
}

}  // namespace

TEST(LoadKg, DuplicateLinesCollapse) {
  TempDir d;
  Kg kg = load_kg(d.write("t", "a\tr\tb\na\tr\tb\n"));
  EXPECT_EQ(kg.num_entities(), 2u);
  EXPECT_EQ(kg.num_relations(), 1u);
  EXPECT_EQ(kg.num_triples(), 1u);
}

TEST(LoadKg, InternsInFirstAppearanceOrder) {
  TempDir d;
  Kg kg = load_kg(d.write("t", "a\tr\tb\nb\ts\tc\n"));
  EXPECT_EQ(kg.num_entities(), 3u);
  EXPECT_EQ(kg.num_relations(), 2u);
  EXPECT_EQ(kg.num_triples(), 2u);
  EXPECT_EQ(kg.entity_name(0), "a");
  EXPECT_EQ(kg.entity_name(2), "c");
  ASSERT_EQ(kg.out_edges(0).size(), 1u);
  EXPECT_EQ(kg.out_edges(0)[0], (Edge{*kg.find_relation("r"), *kg.find_entity("b")}));
}

TEST(LoadKg, CrlfAndBlankLinesAreTolerated) {
  TempDir d;
  Kg kg = load_kg(d.write("t", "a\tr\tb\r\n\nb\tr\tc\r\n"));
  EXPECT_EQ(kg.num_triples(), 2u);
  EXPECT_TRUE(kg.find_entity("c").has_value());
}

TEST(LoadKg, MalformedLineReportsLineNumber) {
  TempDir d;
  auto p = d.write("t", "a\tr\tb\na r b\n");
  try {
    load_kg(p);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadKg, EmptyFileAndMissingFileFail) {
  TempDir d;
  EXPECT_THROW(load_kg(d.write("t", "")), Error);
  EXPECT_THROW(load_kg((d.path / "nope").string()), Error);
}

TEST(LoadKg, SaveRoundTrip) {
  TempDir d;
  Kg a = toy::make_kg({{"a", "r", "b"}, {"b", "s", "c"}, {"c", "r", "a"}});
  save_kg(a, (d.path / "t").string());
  Kg b = load_kg((d.path / "t").string());
  ASSERT_EQ(a.num_triples(), b.num_triples());
  for (std::size_t i = 0; i < a.num_triples(); ++i) EXPECT_EQ(a.triples()[i], b.triples()[i]);
}

TEST(KgBuilder, RejectsUninternedIds) {
  KgBuilder b;
  b.intern_entity("a");
  EXPECT_THROW(b.add(Triple{0, 0, 0}), InvalidArgument);
}

TEST(KgProperty, AdjacencyMatchesTriplesOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    KgBuilder b;
    std::uniform_int_distribution<int> ent(0, 15), rel(0, 3);
    int n = std::uniform_int_distribution<int>(1, 80)(rng);
    for (int i = 0; i < n; ++i) {
      b.add("e" + std::to_string(ent(rng)), "r" + std::to_string(rel(rng)), "e" + std::to_string(ent(rng)));
    }
    expect_adjacency_consistent(std::move(b).build());
  }
}

TEST(AlignmentSet, EnforcesOneToOne) {
  AlignmentSet a;
  EXPECT_TRUE(a.insert(0, 0));
  EXPECT_FALSE(a.insert(0, 1));
  EXPECT_FALSE(a.insert(1, 0));
  EXPECT_FALSE(a.insert(0, 0));
  EXPECT_TRUE(a.insert(1, 1, Provenance::proposed, 0.3));
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(*a.target_of(1), 1u);
  EXPECT_EQ(*a.source_of(0), 0u);
  EXPECT_EQ(a.find(1)->provenance, Provenance::proposed);
  EXPECT_DOUBLE_EQ(a.find(1)->confidence, 0.3);
}

TEST(AlignmentSet, RandomInsertsNeverBreakOneToOne) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<EntityId> id(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    AlignmentSet a;
    for (int i = 0; i < 60; ++i) a.insert(id(rng), id(rng));
    std::set<EntityId> s, t;
    for (const auto& p : a) {
      EXPECT_TRUE(s.insert(p.source).second);
      EXPECT_TRUE(t.insert(p.target).second);
    }
  }
}

TEST(AlignmentSet, Overlap) {
  auto a = toy::links({{0, 0}, {1, 1}, {2, 2}});
  auto b = toy::links({{0, 0}, {1, 2}});
  EXPECT_EQ(a.overlap(b), 1u);
  EXPECT_EQ(b.overlap(a), 1u);
}

TEST(LoadSplits, OnePairEach) {
  TempDir d;
  Kg src = toy::make_kg({{"a", "r", "b"}, {"b", "r", "c"}});
  Kg tgt = toy::make_kg({{"x", "r", "y"}, {"y", "r", "z"}});
  d.write("train_links", "a\tx\n");
  d.write("valid_links", "b\ty\n");
  d.write("test_links", "c\tz\n");
  SplitSet s = load_splits(d.path.string(), src, tgt);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.valid.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_TRUE(s.test.contains(*src.find_entity("c"), *tgt.find_entity("z")));
}

TEST(LoadSplits, OverlapIsAnError) {
  TempDir d;
  Kg src = toy::make_kg({{"a", "r", "b"}, {"b", "r", "c"}});
  Kg tgt = toy::make_kg({{"x", "r", "y"}, {"y", "r", "z"}});
  d.write("train_links", "a\tx\n");
  d.write("valid_links", "b\ty\n");
  d.write("test_links", "a\tx\n");
  EXPECT_THROW(load_splits(d.path.string(), src, tgt), InvalidArgument);
}

TEST(LoadSplits, UnknownEntityIsNamed) {
  TempDir d;
  Kg src = toy::make_kg({{"a", "r", "b"}});
  Kg tgt = toy::make_kg({{"x", "r", "y"}});
  auto p = d.write("links", "a\tx\nghost\ty\n");
  try {
    load_links(p, src, tgt);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}
