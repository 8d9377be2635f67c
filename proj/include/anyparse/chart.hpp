#pragma once

// Chart edges, the append-only chart, and the best-first agenda.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anyparse/feature_structure.hpp"
#include "anyparse/grammar.hpp"
#include "anyparse/lattice.hpp"

namespace anyparse {

using EdgeId = std::uint32_t;

/// A constraint whose application waits for the end of the utterance,
/// already expressed in the owning edge's layout coordinates.
struct DeferredConstraint {
  FeatureStructure constraint;
  std::string origin;  // "rule 3 line 12" style, for diagnostics
};

struct Edge {
  EdgeId id = 0;
  Vertex from = 0;
  Vertex to = 0;
  const GrammarRule* rule = nullptr;     // null for lexical edges
  const LexicalEntry* entry = nullptr;   // set for lexical edges
  std::size_t dot = 0;
  FeatureStructure fs;
  double score = 1.0;
  std::vector<EdgeId> children;
  std::vector<std::uint32_t> choices;    // alternative taken per rule equation
  std::vector<DeferredConstraint> pending_final;
  std::optional<EdgeId> refines;         // set on products of finalization
  std::optional<std::size_t> hypothesis; // lattice index, lexical edges only

  bool lexical() const { return entry != nullptr; }
  bool passive() const { return lexical() || dot == rule->rhs.size(); }
  const Category& category() const { return lexical() ? entry->category : rule->lhs; }
  /// Category after the dot; null for passive edges.
  const Category* next_category() const {
    return passive() ? nullptr : &rule->rhs[dot];
  }
};

/// Append-only edge store.  Edges are never removed or changed once inserted.
class Chart {
 public:
  /// Inserts `edge` (assigning its id) unless an edge with the same span,
  /// origin, dot, children and choices exists.  Finalization products are
  /// logged but not indexed for combination.
  std::optional<EdgeId> insert(Edge edge);

  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  std::size_t size() const { return edges_.size(); }
  const std::deque<Edge>& edges() const { return edges_; }

  /// Active edges whose right end is `v`.
  const std::vector<EdgeId>& active_ending_at(Vertex v) const;
  /// Passive edges whose left end is `v`.
  const std::vector<EdgeId>& passive_starting_at(Vertex v) const;

  bool contains_active(std::size_t rule_id, Vertex at) const;

 private:
  struct Key {
    Vertex from, to;
    std::size_t origin;  // rule id, or entry id offset into the upper half
    std::size_t dot;
    std::vector<EdgeId> children;
    std::vector<std::uint32_t> choices;
    std::optional<EdgeId> refines;
    auto operator<=>(const Key&) const = default;
  };
  static Key key_of(const Edge& e);

  std::deque<Edge> edges_;
  std::set<Key> keys_;
  std::map<Vertex, std::vector<EdgeId>> active_by_end_;
  std::map<Vertex, std::vector<EdgeId>> passive_by_start_;
};

enum class TaskKind { Scan, Combine, Predict, Finalize };

const char* to_string(TaskKind kind);

struct Task {
  TaskKind kind = TaskKind::Scan;
  double priority = 0.0;
  std::size_t hypothesis = 0;            // Scan
  EdgeId active = 0;                     // Combine
  EdgeId passive = 0;                    // Combine, Predict
  std::optional<std::uint32_t> disjunct; // Combine, when the step is disjunctive
  std::size_t rule = 0;                  // Predict
  EdgeId edge = 0;                       // Finalize
};

/// Priority queue of tasks: higher priority first, insertion order among
/// equals.  With a beam, the lowest-ranked task is dropped on overflow.
class Agenda {
 public:
  explicit Agenda(std::optional<std::size_t> beam = std::nullopt) : beam_(beam) {}

  void push(Task task);
  std::optional<Task> pop();

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t dropped() const { return dropped_; }
  bool contains(TaskKind kind) const;

 private:
  struct Entry {
    double priority;
    std::uint64_t seq;
    Task task;
  };
  struct Order {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq < b.seq;
    }
  };

  std::optional<std::size_t> beam_;
  std::set<Entry, Order> entries_;
  std::uint64_t next_seq_ = 0;
  std::size_t dropped_ = 0;
};

}  // namespace anyparse
