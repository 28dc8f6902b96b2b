#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cyctea/common.hpp"

namespace cyctea {

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    return static_cast<std::size_t>(
        mix64((std::uint64_t{t.head} << 40) ^ (std::uint64_t{t.relation} << 20) ^ t.tail));
  }
};

// One adjacency entry: the relation and the entity at the other end.
struct Edge {
  RelationId relation;
  EntityId neighbor;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class KgBuilder;

// A knowledge graph with interned entity and relation names. Immutable once
// built; ids are dense and assigned in first-appearance order.
class Kg {
 public:
  Kg() = default;

  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_relations() const noexcept { return relation_names_.size(); }
  std::size_t num_triples() const noexcept { return triples_.size(); }

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const std::vector<Edge>& out_edges(EntityId e) const { return out_.at(e); }
  const std::vector<Edge>& in_edges(EntityId e) const { return in_.at(e); }
  std::size_t degree(EntityId e) const { return out_.at(e).size() + in_.at(e).size(); }

  const std::string& entity_name(EntityId e) const { return entity_names_.at(e); }
  const std::string& relation_name(RelationId r) const { return relation_names_.at(r); }

  std::optional<EntityId> find_entity(std::string_view name) const {
    auto it = entity_index_.find(std::string(name));
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<RelationId> find_relation(std::string_view name) const {
    auto it = relation_index_.find(std::string(name));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const Triple& t) const { return triple_set_.count(t) > 0; }

 private:
  friend class KgBuilder;

  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> triple_set_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<Edge>> in_;
};

class KgBuilder {
 public:
  EntityId intern_entity(std::string_view name) {
    auto [it, inserted] =
        kg_.entity_index_.try_emplace(std::string(name), static_cast<EntityId>(kg_.entity_names_.size()));
    if (inserted) {
      kg_.entity_names_.emplace_back(name);
      kg_.out_.emplace_back();
      kg_.in_.emplace_back();
    }
    return it->second;
  }

  RelationId intern_relation(std::string_view name) {
    auto [it, inserted] = kg_.relation_index_.try_emplace(
        std::string(name), static_cast<RelationId>(kg_.relation_names_.size()));
    if (inserted) kg_.relation_names_.emplace_back(name);
    return it->second;
  }

  // Returns false when the triple was already present.
  bool add(std::string_view head, std::string_view relation, std::string_view tail) {
    EntityId h = intern_entity(head);
    RelationId r = intern_relation(relation);
    EntityId t = intern_entity(tail);
    return add({h, r, t});
  }

  bool add(const Triple& t) {
    if (t.head >= kg_.entity_names_.size() || t.tail >= kg_.entity_names_.size() ||
        t.relation >= kg_.relation_names_.size()) {
      throw InvalidArgument("triple references an id that was never interned");
    }
    if (!kg_.triple_set_.insert(t).second) return false;
    kg_.triples_.push_back(t);
    kg_.out_[t.head].push_back({t.relation, t.tail});
    kg_.in_[t.tail].push_back({t.relation, t.head});
    return true;
  }

  Kg build() && { return std::move(kg_); }

 private:
  Kg kg_;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Reads a TAB-separated `head relation tail` file. Duplicate lines collapse.
inline Kg load_kg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open triple file: " + path);
  KgBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  std::size_t non_empty = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::strip_cr(line);
    if (view.empty()) continue;
    auto fields = detail::split_tabs(view);
    if (fields.size() != 3) {
      throw ParseError(path, line_no,
                       "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    ++non_empty;
    builder.add(fields[0], fields[1], fields[2]);
  }
  if (non_empty == 0) throw Error("triple file is empty: " + path);
  return std::move(builder).build();
}

inline void save_kg(const Kg& kg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write triple file: " + path);
  for (const auto& t : kg.triples()) {
    out << kg.entity_name(t.head) << '\t' << kg.relation_name(t.relation) << '\t'
        << kg.entity_name(t.tail) << '\n';
  }
}

enum class Provenance { seed, proposed, resolved };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::seed: return "seed";
    case Provenance::proposed: return "proposed";
    case Provenance::resolved: return "resolved";
  }
  return "?";
}

struct AlignedPair {
  EntityId source;
  EntityId target;
  Provenance provenance = Provenance::seed;
  double confidence = 1.0;
};

// A 1:1 partial matching between source and target entities. Iteration order
// is insertion order.
class AlignmentSet {
 public:
  // Inserts the pair unless either endpoint is already matched. Returns
  // whether the pair was inserted (an exact duplicate also returns false).
  bool insert(EntityId source, EntityId target, Provenance provenance = Provenance::seed,
              double confidence = 1.0) {
    if (by_source_.count(source) || by_target_.count(target)) return false;
    by_source_.emplace(source, pairs_.size());
    by_target_.emplace(target, pairs_.size());
    pairs_.push_back({source, target, provenance, confidence});
    return true;
  }

  bool insert(const AlignedPair& p) { return insert(p.source, p.target, p.provenance, p.confidence); }

  bool contains(EntityId source, EntityId target) const {
    auto it = by_source_.find(source);
    return it != by_source_.end() && pairs_[it->second].target == target;
  }
  bool has_source(EntityId source) const { return by_source_.count(source) > 0; }
  bool has_target(EntityId target) const { return by_target_.count(target) > 0; }

  std::optional<EntityId> target_of(EntityId source) const {
    auto it = by_source_.find(source);
    if (it == by_source_.end()) return std::nullopt;
    return pairs_[it->second].target;
  }
  std::optional<EntityId> source_of(EntityId target) const {
    auto it = by_target_.find(target);
    if (it == by_target_.end()) return std::nullopt;
    return pairs_[it->second].source;
  }
  const AlignedPair* find(EntityId source) const {
    auto it = by_source_.find(source);
    return it == by_source_.end() ? nullptr : &pairs_[it->second];
  }

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<AlignedPair>& pairs() const noexcept { return pairs_; }
  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  std::vector<EntityId> sources() const {
    std::vector<EntityId> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.source);
    return out;
  }
  std::vector<EntityId> targets() const {
    std::vector<EntityId> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.target);
    return out;
  }

  // Number of (source, target) pairs shared with `other`, ignoring provenance.
  std::size_t overlap(const AlignmentSet& other) const {
    std::size_t n = 0;
    for (const auto& p : pairs_) n += other.contains(p.source, p.target);
    return n;
  }

 private:
  std::vector<AlignedPair> pairs_;
  std::unordered_map<EntityId, std::size_t> by_source_;
  std::unordered_map<EntityId, std::size_t> by_target_;
};

struct SplitSet {
  AlignmentSet train;
  AlignmentSet valid;
  AlignmentSet test;
};

// Reads `source<TAB>target` lines, resolving names against the two graphs.
inline AlignmentSet load_links(const std::string& path, const Kg& source, const Kg& target) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open link file: " + path);
  AlignmentSet links;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::strip_cr(line);
    if (view.empty()) continue;
    auto fields = detail::split_tabs(view);
    if (fields.size() != 2) {
      throw ParseError(path, line_no,
                       "expected 2 tab-separated fields, found " + std::to_string(fields.size()));
    }
    auto s = source.find_entity(fields[0]);
    if (!s) throw ParseError(path, line_no, "unknown source entity '" + std::string(fields[0]) + "'");
    auto t = target.find_entity(fields[1]);
    if (!t) throw ParseError(path, line_no, "unknown target entity '" + std::string(fields[1]) + "'");
    if (!links.insert(*s, *t)) {
      if (links.contains(*s, *t)) continue;
      throw ParseError(path, line_no, "link violates the 1:1 constraint");
    }
  }
  return links;
}

inline void save_links(const AlignmentSet& links, const Kg& source, const Kg& target,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write link file: " + path);
  for (const auto& p : links) {
    out << source.entity_name(p.source) << '\t' << target.entity_name(p.target) << '\n';
  }
}

struct SplitFiles {
  std::string train = "train_links";
  std::string valid = "valid_links";
  std::string test = "test_links";
};

inline void check_disjoint(const SplitSet& s) {
  auto clash = [](const AlignmentSet& a, const AlignmentSet& b, const char* what) {
    for (const auto& p : a) {
      if (b.has_source(p.source) || b.has_target(p.target)) {
        throw InvalidArgument(std::string("splits overlap between ") + what);
      }
    }
  };
  clash(s.train, s.valid, "train and valid");
  clash(s.train, s.test, "train and test");
  clash(s.valid, s.test, "valid and test");
}

inline SplitSet load_splits(const std::string& dir, const Kg& source, const Kg& target,
                            const SplitFiles& files = {}) {
  SplitSet s;
  s.train = load_links(dir + "/" + files.train, source, target);
  s.valid = load_links(dir + "/" + files.valid, source, target);
  s.test = load_links(dir + "/" + files.test, source, target);
  check_disjoint(s);
  return s;
}

}  // namespace cyctea
