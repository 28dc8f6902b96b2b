#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cyctea/config.hpp"
#include "cyctea/cycle.hpp"
#include "cyctea/io.hpp"
#include "cyctea/synth.hpp"
#include "toy.hpp"

using namespace cyctea;

namespace {

Dataset small_dataset(int n = 150, double noise = 0.1, std::uint64_t seed = 5) {
  SynthSpec s;
  s.n_entities = n;
  s.structure_noise = noise;
  s.rng_seed = seed;
  auto pair = generate_synthetic_pair(s);
  auto kgs = std::make_shared<KgPair>();
  kgs->source = std::move(pair.source);
  kgs->target = std::move(pair.target);
  Dataset d;
  d.splits = split_alignment(pair.gold, 0.3, 0.1, seed);
  d.kgs = std::move(kgs);
  return d;
}

CycleConfig quick_config(std::size_t k) {
  CycleConfig c;
  const ModelKind kinds[] = {ModelKind::translational, ModelKind::neighborhood, ModelKind::path_skip};
  for (std::size_t i = 0; i < k; ++i) {
    AlignerConfig a;
    a.model_kind = kinds[i % 3];
    a.dim = 16;
    a.base_epochs = 15;
    a.semi_epochs = 3;
    c.aligners.push_back(a);
  }
  c.max_iterations = 2;
  c.min_new_pairs = 0;
  c.patience = 5;
  c.selection.sim_threshold = 0.3;
  return c;
}

}  // namespace

TEST(AugmentTraining, AddsFreePairsAndDropsClashes) {
  AlignerConfig c;
  c.dim = 4;
  c.semi_epochs = 1;
  c.base_epochs = 2;
  auto kgs = toy::five_entity_pair();
  Aligner a(kgs, c);
  a.set_training(toy::links({{0, 0}}));
  AlignmentSet incoming;
  incoming.insert(1, 1, Provenance::resolved, 0.7);
  incoming.insert(0, 1, Provenance::resolved, 0.9);  // never inserted: target 1 is already taken
  auto r = augment_training(a, incoming);
  EXPECT_EQ(r.added, 1u);
  EXPECT_EQ(a.training().size(), 2u);
  EXPECT_TRUE(a.training().contains(1, 1));
  EXPECT_EQ(a.training().find(0)->provenance, Provenance::seed);
  EXPECT_EQ(a.epochs_trained(), 1);

  AlignmentSet clash = toy::links({{2, 0}});
  auto r2 = augment_training(a, clash);
  EXPECT_EQ(r2.added, 0u);
  EXPECT_EQ(r2.dropped, 1u);
  EXPECT_FALSE(a.training().has_source(2));
}

TEST(AugmentTraining, SeedProvenanceIsRelabelled) {
  AlignerConfig c;
  c.dim = 4;
  c.semi_epochs = 0;
  Aligner a(toy::five_entity_pair(), c);
  a.set_training(toy::links({{0, 0}}));
  auto r = augment_training(a, toy::links({{1, 1}}));
  EXPECT_EQ(r.added, 1u);
  EXPECT_EQ(a.training().find(1)->provenance, Provenance::proposed);
}

TEST(Strategy, NamesRoundTrip) {
  for (auto s : {Strategy::cycle_teaching, Strategy::self_training, Strategy::intersection, Strategy::union_all,
                 Strategy::majority_vote}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("bagging"), InvalidArgument);
}

TEST(Run, RejectsBadSetups) {
  auto d = small_dataset();
  EXPECT_THROW(run_cycle_teaching(d, quick_config(1)), InvalidArgument);
  EXPECT_THROW(run_baseline(Strategy::majority_vote, d, quick_config(2)), InvalidArgument);
  EXPECT_THROW(run_baseline(Strategy::cycle_teaching, d, quick_config(2)), InvalidArgument);
  auto c = quick_config(2);
  c.fixed_order = {0, 0};
  EXPECT_THROW(run_cycle_teaching(d, c), InvalidArgument);
  Dataset empty = d;
  empty.splits.valid = AlignmentSet{};
  EXPECT_THROW(run_cycle_teaching(empty, quick_config(2)), InvalidArgument);
}

TEST(Run, OneIterationReportsEveryAligner) {
  auto d = small_dataset();
  auto c = quick_config(3);
  c.max_iterations = 1;
  auto r = run_cycle_teaching(d, c);
  ASSERT_EQ(r.reports.size(), 1u);
  const auto& rep = r.reports[0];
  EXPECT_EQ(rep.iteration, 1);
  EXPECT_EQ(rep.strategy, "cycle_teaching");
  EXPECT_EQ(rep.aligners.size(), 3u);
  EXPECT_EQ(rep.cycle.size(), 3u);
  EXPECT_EQ(rep.cycle.front(), 0u);
  EXPECT_EQ(r.stop_reason, "max_iterations");
  EXPECT_EQ(r.final.test.size(), 3u);
  for (const auto& a : rep.aligners) {
    EXPECT_GE(a.test.hits_at(1), 0.0);
    EXPECT_LE(a.test.hits_at(1), a.test.hits_at(5));
    EXPECT_EQ(a.training_size, d.splits.train.size() + a.resolved);
  }
}

TEST(Run, SameSeedSameReports) {
  auto d = small_dataset();
  auto c = quick_config(2);
  auto a = run_cycle_teaching(d, c);
  auto b = run_cycle_teaching(d, c);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) EXPECT_EQ(to_json(a.reports[i]).dump(), to_json(b.reports[i]).dump());
}

TEST(Run, TrainingKeepsSeedsAndStaysOneToOne) {
  auto d = small_dataset();
  for (auto strategy : {Strategy::cycle_teaching, Strategy::self_training, Strategy::intersection,
                        Strategy::union_all, Strategy::majority_vote}) {
    auto c = quick_config(3);
    auto r = run_strategy(strategy, d, c);
    for (const auto& a : r.aligners) {
      std::set<EntityId> s, t;
      for (const auto& p : a->training()) {
        EXPECT_TRUE(s.insert(p.source).second);
        EXPECT_TRUE(t.insert(p.target).second);
        // nothing from the validation split leaks in
        EXPECT_FALSE(d.splits.valid.has_source(p.source));
      }
      for (const auto& p : d.splits.train) EXPECT_TRUE(a->training().contains(p.source, p.target));
    }
  }
}

TEST(Run, IntersectionAddsNoMoreThanMajority) {
  auto d = small_dataset();
  auto c = quick_config(3);
  c.max_iterations = 1;
  auto inter = run_baseline(Strategy::intersection, d, c);
  auto uni = run_baseline(Strategy::union_all, d, c);
  auto maj = run_baseline(Strategy::majority_vote, d, c);
  // identical supervised phase, so the proposals coincide
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(inter.reports[0].aligners[i].proposed, uni.reports[0].aligners[i].proposed);
    EXPECT_LE(inter.reports[0].aligners[i].resolved, maj.reports[0].aligners[i].resolved);
  }
}

TEST(Run, ScoresTheConfiguredCutoffs) {
  auto d = small_dataset();
  auto c = quick_config(2);
  c.max_iterations = 1;
  c.ks = {10, 3};
  auto r = run_cycle_teaching(d, c);
  EXPECT_NO_THROW(r.final.ensemble_test.hits_at(1));
  EXPECT_LE(r.final.ensemble_test.hits_at(3), r.final.ensemble_test.hits_at(10));
  EXPECT_THROW(r.final.ensemble_test.hits_at(5), InvalidArgument);
  toy::TempDir dir;
  auto path = (dir.path / "metrics.csv").string();
  write_metrics_csv(r, c.aligners, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iteration,aligner,model_kind,proposed,resolved,precision,recall,f1,valid_hits@1,hits@1,hits@3,hits@10,mrr");
}

TEST(Config, ParsesMinimalSyntheticConfig) {
  auto j = nlohmann::json::parse(R"({
    "version": 1,
    "dataset": {"synthetic": {"n_entities": 100}},
    "aligners": [{"model_kind": "translational"}, {"model_kind": "neighborhood", "dim": 8}],
    "cycle": {"sim_threshold": 0.7, "rank_against": "all_targets"},
    "seed": 9
  })");
  auto rc = parse_run_config(j);
  EXPECT_EQ(rc.strategy, Strategy::cycle_teaching);
  EXPECT_EQ(rc.cycle.aligners.size(), 2u);
  EXPECT_EQ(rc.cycle.aligners[1].dim, 8);
  EXPECT_DOUBLE_EQ(rc.cycle.selection.sim_threshold, 0.7);
  EXPECT_EQ(rc.cycle.rank_against, RankAgainst::all_targets);
  EXPECT_EQ(rc.cycle.rng_seed, 9u);
  EXPECT_TRUE(rc.synthetic.has_value());
}

TEST(Config, RejectsSchemaViolationsWithFieldPath) {
  auto field_of = [](const char* text) {
    try {
      parse_run_config(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"version": 2})"), "/version");
  EXPECT_EQ(field_of(R"({"version": 1, "dataset": {"synthetic": {}}, "aligners": [{"model_kind": "transe"}]})"),
            "/aligners/0/model_kind");
  EXPECT_EQ(field_of(R"({"version": 1, "dataset": {"synthetic": {}}, "aligners": [{"model_kind": "translational"}]})"),
            "/aligners");
  EXPECT_EQ(field_of(R"({"version": 1, "dataset": {"synthetic": {}}, "strategy": "majority_vote",
                         "aligners": [{"model_kind": "translational"}, {"model_kind": "path_skip"}]})"),
            "/aligners");
  EXPECT_EQ(field_of(R"({"version": 1, "dataset": {"synthetic": {}}, "bogus": 1,
                         "aligners": [{"model_kind": "translational"}, {"model_kind": "path_skip"}]})"),
            "/bogus");
  EXPECT_EQ(field_of(R"({"version": 1, "dataset": {"files": {"source_triples": "/nonexistent/a",
                         "target_triples": "/nonexistent/b", "links_dir": "/nonexistent"}},
                         "aligners": [{"model_kind": "translational"}, {"model_kind": "path_skip"}]})"),
            "/dataset/files/source_triples");
}

TEST(Io, ReportsRoundTripThroughJsonLines) {
  auto d = small_dataset();
  auto c = quick_config(2);
  auto r = run_cycle_teaching(d, c);
  toy::TempDir dir;
  auto path = (dir.path / "reports.jsonl").string();
  write_reports(r.reports, path);
  auto back = read_reports(path);
  ASSERT_EQ(back.size(), r.reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(to_json(back[i]).dump(), to_json(r.reports[i]).dump());
}

TEST(Io, CheckpointRoundTripReproducesScores) {
  auto d = small_dataset();
  AlignerConfig a;
  a.dim = 8;
  a.base_epochs = 5;
  a.semi_epochs = 5;
  Aligner al(d.kgs, a);
  al.train(d.splits.train, 5, true);
  toy::TempDir dir;
  auto path = (dir.path / "ck.txt").string();
  save_checkpoint(make_checkpoint(al), path);
  auto ck = load_checkpoint(path);
  EXPECT_EQ(ck.dim, 8u);
  EXPECT_EQ(ck.epoch, 5);
  EXPECT_EQ(ck.model_kind, ModelKind::translational);
  auto sources = d.splits.test.sources();
  auto targets = d.splits.test.targets();
  auto live = al.similarity_view(sources, targets);
  auto loaded = checkpoint_view(ck, *d.kgs, sources, targets);
  for (std::size_t x = 0; x < live.values().size(); ++x) EXPECT_NEAR(live.values()[x], loaded.values()[x], 1e-6);

  Checkpoint partial = ck;
  partial.vectors.erase(source_key(*d.kgs, sources.front()));
  EXPECT_THROW(checkpoint_view(partial, *d.kgs, sources, targets), Error);
}

TEST(Io, MalformedCheckpointIsAParseError) {
  toy::TempDir dir;
  EXPECT_THROW(load_checkpoint(dir.write("a.txt", "no header\n")), ParseError);
  EXPECT_THROW(load_checkpoint(dir.write("b.txt", "# model_kind=translational dim=2 epoch=1\nsrc:a 1\n")), ParseError);
  EXPECT_THROW(load_checkpoint(dir.write("c.txt", "# model_kind=translational dim=1 epoch=1\nsrc:a 1\nsrc:a 2\n")),
               ParseError);
  EXPECT_THROW(load_checkpoint((dir.path / "missing.txt").string()), Error);
}
