#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyctea/cycle.hpp"

namespace cyctea {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- reports

inline Json to_json(const Quality& q) {
  return {{"precision", q.precision}, {"recall", q.recall}, {"f1", q.f1}, {"correct", q.correct}};
}

inline Json to_json(const Metrics& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m.hits) j["hits@" + std::to_string(k)] = v;
  j["mrr"] = m.mrr;
  j["count"] = m.count;
  return j;
}

inline Json to_json(const AlignerReport& r) {
  return {{"model_kind", std::string(to_string(r.model_kind))},
          {"proposed", r.proposed},
          {"proposed_quality", to_json(r.proposed_quality)},
          {"conflicts", r.conflicts},
          {"resolved", r.resolved},
          {"dropped", r.dropped},
          {"resolved_quality", to_json(r.resolved_quality)},
          {"training_size", r.training_size},
          {"valid_hits@1", r.valid_hits1},
          {"test", to_json(r.test)},
          {"frozen", r.frozen}};
}

inline Json to_json(const IterationReport& r) {
  Json aligners = Json::array();
  for (const auto& a : r.aligners) aligners.push_back(to_json(a));
  return {{"iteration", r.iteration},
          {"strategy", r.strategy},
          {"cycle", r.cycle},
          {"cycle_weight", r.cycle_weight},
          {"aligners", aligners},
          {"ensemble", {{"valid_hits@1", r.ensemble_valid}, {"test", to_json(r.ensemble_test)}}}};
}

inline Quality quality_from_json(const Json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
          j.at("correct").get<std::size_t>()};
}

inline Metrics metrics_from_json(const Json& j) {
  Metrics m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key().rfind("hits@", 0) == 0) m.hits.emplace_back(std::stoi(it.key().substr(5)), it.value().get<double>());
  }
  m.mrr = j.at("mrr").get<double>();
  m.count = j.at("count").get<std::size_t>();
  return m;
}

inline IterationReport report_from_json(const Json& j) {
  IterationReport r;
  r.iteration = j.at("iteration").get<int>();
  r.strategy = j.at("strategy").get<std::string>();
  r.cycle = j.at("cycle").get<std::vector<std::size_t>>();
  r.cycle_weight = j.at("cycle_weight").get<double>();
  for (const auto& a : j.at("aligners")) {
    AlignerReport x;
    x.model_kind = parse_model_kind(a.at("model_kind").get<std::string>());
    x.proposed = a.at("proposed").get<std::size_t>();
    x.proposed_quality = quality_from_json(a.at("proposed_quality"));
    x.conflicts = a.at("conflicts").get<std::size_t>();
    x.resolved = a.at("resolved").get<std::size_t>();
    x.dropped = a.at("dropped").get<std::size_t>();
    x.resolved_quality = quality_from_json(a.at("resolved_quality"));
    x.training_size = a.at("training_size").get<std::size_t>();
    x.valid_hits1 = a.at("valid_hits@1").get<double>();
    x.test = metrics_from_json(a.at("test"));
    x.frozen = a.at("frozen").get<bool>();
    r.aligners.push_back(std::move(x));
  }
  r.ensemble_valid = j.at("ensemble").at("valid_hits@1").get<double>();
  r.ensemble_test = metrics_from_json(j.at("ensemble").at("test"));
  return r;
}

// One JSON object per line.
inline void write_reports(const std::vector<IterationReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

inline std::vector<IterationReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<IterationReport> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(report_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(path, n, e.what());
    }
  }
  return out;
}

inline Json to_json(const RunSummary& s, const std::vector<AlignerConfig>& configs) {
  Json aligners = Json::array();
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    aligners.push_back({{"model_kind", std::string(to_string(configs.at(i).model_kind))},
                        {"valid_hits@1", s.valid_hits1[i]},
                        {"test", to_json(s.test[i])}});
  }
  return {{"aligners", aligners},
          {"ensemble", {{"valid_hits@1", s.ensemble_valid}, {"test", to_json(s.ensemble_test)}}}};
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

// One row per iteration per aligner plus one ensemble row. Iteration 0 holds
// the supervised-only results after base training.
inline void write_metrics_csv(const RunResult& result, const std::vector<AlignerConfig>& configs,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  using detail::csv_number;
  const auto& sup = result.supervised;
  out << "iteration,aligner,model_kind,proposed,resolved,precision,recall,f1,valid_hits@1";
  for (const auto& [k, v] : sup.ensemble_test.hits) out << ",hits@" << k;
  out << ",mrr\n";
  auto metric_cols = [&](const Metrics& m) {
    std::string cols;
    for (const auto& [k, v] : m.hits) cols += csv_number(v) + ",";
    return cols + csv_number(m.mrr);
  };
  for (std::size_t i = 0; i < sup.test.size(); ++i) {
    out << "0," << i << ',' << to_string(configs.at(i).model_kind) << ",0,0,,,," << csv_number(sup.valid_hits1[i])
        << ',' << metric_cols(sup.test[i]) << '\n';
  }
  out << "0,ensemble,,,,,,," << csv_number(sup.ensemble_valid) << ',' << metric_cols(sup.ensemble_test) << '\n';
  for (const auto& rep : result.reports) {
    std::size_t proposed = 0, resolved = 0;
    for (std::size_t i = 0; i < rep.aligners.size(); ++i) {
      const auto& a = rep.aligners[i];
      proposed += a.proposed;
      resolved += a.resolved;
      out << rep.iteration << ',' << i << ',' << to_string(a.model_kind) << ',' << a.proposed << ',' << a.resolved
          << ',' << csv_number(a.resolved_quality.precision) << ',' << csv_number(a.resolved_quality.recall) << ','
          << csv_number(a.resolved_quality.f1) << ',' << csv_number(a.valid_hits1) << ',' << metric_cols(a.test)
          << '\n';
    }
    out << rep.iteration << ",ensemble,," << proposed << ',' << resolved << ",,,," << csv_number(rep.ensemble_valid)
        << ',' << metric_cols(rep.ensemble_test) << '\n';
  }
}

// ------------------------------------------------------------ checkpoints

// Alignment representations of one aligner, keyed by side-prefixed entity
// name ("src:<name>" / "tgt:<name>").
struct Checkpoint {
  ModelKind model_kind = ModelKind::translational;
  std::size_t dim = 0;
  int epoch = 0;
  std::map<std::string, Vector> vectors;
};

inline std::string source_key(const KgPair& kgs, EntityId e) { return "src:" + kgs.source.entity_name(e); }
inline std::string target_key(const KgPair& kgs, EntityId e) { return "tgt:" + kgs.target.entity_name(e); }

inline Checkpoint make_checkpoint(const Aligner& a) {
  Checkpoint c;
  c.model_kind = a.kind();
  c.dim = static_cast<std::size_t>(a.config().dim);
  c.epoch = a.epochs_trained();
  const KgPair& kgs = a.kgs();
  for (EntityId e = 0; e < kgs.source.num_entities(); ++e) c.vectors.emplace(source_key(kgs, e), a.source_vector(e));
  for (EntityId e = 0; e < kgs.target.num_entities(); ++e) c.vectors.emplace(target_key(kgs, e), a.target_vector(e));
  return c;
}

// Header `# model_kind=<k> dim=<d> epoch=<n>`, then `<key> v1 ... vd` with
// 9 significant digits. Entity names must not contain whitespace.
inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << "# model_kind=" << to_string(c.model_kind) << " dim=" << c.dim << " epoch=" << c.epoch << '\n';
  char buf[32];
  for (const auto& [key, v] : c.vectors) {
    if (key.find_first_of(" \t\n") != std::string::npos) {
      throw InvalidArgument("checkpoint key contains whitespace: '" + key + "'");
    }
    out << key;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.9g", x);
      out << buf;
    }
    out << '\n';
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path);
  Checkpoint c;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError(path, 1, "missing checkpoint header");
  {
    std::istringstream hs(line.substr(2));
    std::string field;
    bool kind = false, dim = false, epoch = false;
    while (hs >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError(path, 1, "bad header field '" + field + "'");
      std::string k = field.substr(0, eq), v = field.substr(eq + 1);
      try {
        if (k == "model_kind") {
          c.model_kind = parse_model_kind(v);
          kind = true;
        } else if (k == "dim") {
          c.dim = std::stoul(v);
          dim = true;
        } else if (k == "epoch") {
          c.epoch = std::stoi(v);
          epoch = true;
        }
      } catch (const std::exception& e) {
        throw ParseError(path, 1, "bad header value '" + field + "'");
      }
    }
    if (!kind || !dim || !epoch || c.dim == 0) throw ParseError(path, 1, "header needs model_kind, dim and epoch");
  }
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    Vector v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw ParseError(path, n, "non-numeric vector entry");
    if (v.size() != c.dim) {
      throw ParseError(path, n, "expected " + std::to_string(c.dim) + " values, found " + std::to_string(v.size()));
    }
    if (!c.vectors.emplace(key, std::move(v)).second) throw ParseError(path, n, "duplicate key '" + key + "'");
  }
  return c;
}

// Cosine view from checkpoint vectors; throws naming every missing entity.
inline SimilarityView checkpoint_view(const Checkpoint& c, const KgPair& kgs, const std::vector<EntityId>& sources,
                                      const std::vector<EntityId>& targets) {
  std::vector<std::string> missing;
  auto lookup = [&](const std::string& key) -> const Vector* {
    auto it = c.vectors.find(key);
    if (it == c.vectors.end()) {
      missing.push_back(key);
      return nullptr;
    }
    return &it->second;
  };
  std::vector<const Vector*> sv, tv;
  for (EntityId s : sources) sv.push_back(lookup(source_key(kgs, s)));
  for (EntityId t : targets) tv.push_back(lookup(target_key(kgs, t)));
  if (!missing.empty()) {
    std::string msg = "checkpoint lacks " + std::to_string(missing.size()) + " entities:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw Error(msg);
  }
  std::unordered_map<EntityId, std::size_t> si, ti;
  for (std::size_t i = 0; i < sources.size(); ++i) si.emplace(sources[i], i);
  for (std::size_t i = 0; i < targets.size(); ++i) ti.emplace(targets[i], i);
  return cosine_view(
      sources, targets, [&](EntityId s) { return ConstVec(*sv[si.at(s)]); },
      [&](EntityId t) { return ConstVec(*tv[ti.at(t)]); });
}

}  // namespace cyctea
