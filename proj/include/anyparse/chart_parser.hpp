#pragma once

// Incremental bottom-up active chart parser over word lattices.
//
// All work goes through the agenda, and one popped task is one transaction:
// a scan, a fundamental-rule application with all of its unifications, a
// prediction, or the application of an edge's deferred constraints.  Between
// two calls to step() the chart only holds complete edges.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anyparse/chart.hpp"
#include "anyparse/feature_structure.hpp"
#include "anyparse/grammar.hpp"
#include "anyparse/lattice.hpp"

namespace anyparse {

/// Score of a combined edge: the product of its parts.
double combine_scores(double a, double b);

struct ParserOptions {
  std::optional<std::size_t> beam;  // max agenda size
};

struct TransactionOutcome {
  std::optional<TaskKind> kind;  // empty: nothing to do (quiescent)
  std::vector<EdgeId> edges_added;
  std::size_t failures = 0;
  std::chrono::nanoseconds duration{0};

  bool quiescent() const { return !kind.has_value(); }
};

struct ParserStats {
  std::uint64_t category_checks = 0;
  std::uint64_t unifications = 0;  // fundamental-rule applications attempted
  std::uint64_t unification_failures = 0;
  std::uint64_t transactions = 0;
  std::uint64_t finalize_failures = 0;
};

enum class FinalStatus { Open, Final, Inconsistent };

class ChartParser {
 public:
  ChartParser(std::shared_ptr<const Grammar> grammar, std::shared_ptr<const Lexicon> lexicon,
              ParserOptions options = {});

  /// Appends a hypothesis to the lattice and schedules its scan.
  void feed(WordHypothesis hypothesis);
  void end_input() { input_ended_ = true; }
  bool input_ended() const { return input_ended_; }

  bool has_work() const { return !agenda_.empty(); }
  /// Input ended, finalization scheduled and carried out.
  bool done() const { return finalization_started_ && agenda_.empty(); }

  /// Pops and executes exactly one task.
  TransactionOutcome step();

  /// Schedules one Finalize task per passive edge with deferred constraints
  /// and returns those edges.  Requires ended input and no pending parsing
  /// work.
  std::vector<EdgeId> finalize_utterance();
  bool finalization_started() const { return finalization_started_; }

  // Building blocks, exposed for tests.  Counted in stats().

  /// Adjacent spans and the category after the active edge's dot matches the
  /// passive edge's category.  No unification.
  bool category_check(const Edge& active, const Edge& passive);

  /// Applies the fundamental rule.  The returned edge is not yet in the chart
  /// (its id is unassigned).  `disjunct` selects one combination of the
  /// step's disjunctive equations.
  Outcome<Edge> fundamental_rule(const Edge& active, const Edge& passive,
                                 std::optional<std::uint32_t> disjunct);

  /// Inserts lexical edges for lattice hypothesis `index`; returns new ids.
  std::vector<EdgeId> scan(std::size_t index);

  /// Inserts the empty active edges for every rule starting with the passive
  /// edge's category; returns new ids.
  std::vector<EdgeId> predict(const Edge& passive);

  /// Number of alternative combinations for advancing `rule` over constituent
  /// `position` (1-based).
  std::uint32_t disjunct_count(const GrammarRule& rule, std::size_t position) const;

  const Chart& chart() const { return chart_; }
  const Lattice& lattice() const { return lattice_; }
  const Agenda& agenda() const { return agenda_; }
  const ParserStats& stats() const { return stats_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const Grammar& grammar() const { return *grammar_; }

  /// Open before finalization; afterwards Final or Inconsistent for passive
  /// edges that are not themselves finalization products.
  FinalStatus final_status(EdgeId id) const;
  /// Edges in the order their final status was set; each appears once.
  const std::vector<EdgeId>& status_changes() const { return status_changes_; }
  /// The finalization product of `id`, if it had deferred constraints.
  std::optional<EdgeId> refined(EdgeId id) const;

 private:
  struct Step {
    std::vector<std::size_t> equations;  // indices into rule.equations
    std::vector<std::vector<FeatureStructure>> constraints;  // per equation, per alternative
    std::uint32_t combinations = 1;
  };
  struct CompiledRule {
    std::vector<Step> steps;  // steps[k] consumes rhs position k+1
    std::vector<DeferredConstraint> finals;
  };

  std::optional<EdgeId> add_edge(Edge edge);
  void schedule_for(const Edge& edge);
  void schedule_combines(const Edge& active, const Edge& passive);
  std::optional<EdgeId> predict_rule(const Edge& passive, std::size_t rule_id);
  void run_combine(const Task& task, TransactionOutcome& out);
  void run_finalize(const Task& task, TransactionOutcome& out);

  std::shared_ptr<const Grammar> grammar_;
  std::shared_ptr<const Lexicon> lexicon_;
  std::vector<CompiledRule> compiled_;
  Chart chart_;
  Agenda agenda_;
  Lattice lattice_;
  ParserStats stats_;
  std::vector<std::string> warnings_;
  bool input_ended_ = false;
  bool finalization_started_ = false;
  std::map<EdgeId, EdgeId> refined_;
  std::map<EdgeId, FinalStatus> final_status_;
  std::vector<EdgeId> status_changes_;
};

/// Bracketed derivation of an edge, e.g. `(S:r0 (NP:r1 (Det:l0 the) ...))`.
/// Rule choices of disjunctive equations follow the rule id after '/'.
std::string derivation(const Chart& chart, EdgeId id);

}  // namespace anyparse
