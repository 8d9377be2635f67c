#pragma once

// What a consumer sees: the best-so-far analyses of one parser run.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "anyparse/chart_parser.hpp"

namespace anyparse {

struct StrategyParams {
  /// Report maximal fragments of any category as soon as they exist.
  bool fragment_first = false;
  /// Transactions between regular publications.
  std::size_t publish_every = 1;
  Category start_category = "S";
  std::optional<std::size_t> beam;

  /// Throws std::invalid_argument on publish_every == 0 or beam == 0.
  void validate() const;
};

enum class AnalysisStatus { Partial, Final, Inconsistent };

const char* to_string(AnalysisStatus s);

using Span = std::pair<Vertex, Vertex>;

/// One reported analysis.  Shared between snapshots and never modified.
struct Analysis {
  EdgeId edge = 0;
  Category category;
  Vertex from = 0;
  Vertex to = 0;
  double score = 0;
  FeatureStructure fs;     // the refined structure once finalized
  std::string derivation;
  bool complete = false;   // start category over the whole lattice
  AnalysisStatus status = AnalysisStatus::Partial;
};

/// Immutable, shared list of analyses.  Snapshots that did not change the
/// list share one copy.
class AnalysisList {
 public:
  using Items = std::vector<std::shared_ptr<const Analysis>>;

  AnalysisList() = default;
  explicit AnalysisList(std::shared_ptr<const Items> items) : items_(std::move(items)) {}

  std::size_t size() const { return items_ ? items_->size() : 0; }
  bool empty() const { return size() == 0; }
  const std::shared_ptr<const Analysis>& operator[](std::size_t i) const { return (*items_)[i]; }
  const std::shared_ptr<const Analysis>& back() const { return items_->back(); }
  Items::const_iterator begin() const { return items_ ? items_->begin() : Items::const_iterator{}; }
  Items::const_iterator end() const { return items_ ? items_->end() : Items::const_iterator{}; }

 private:
  std::shared_ptr<const Items> items_;
};

struct CoverPiece {
  EdgeId edge;
  Category category;
  Vertex from;
  Vertex to;
};

struct ParseSnapshot {
  std::uint64_t run_id = 0;
  /// Best score first, ties by edge id.
  AnalysisList analyses;
  /// Non-overlapping fragments behind `coverage`, left to right.
  std::vector<CoverPiece> cover;
  double coverage = 0;
  /// Start-category derivations over `best_span`.
  std::size_t readings = 0;
  std::optional<Span> best_span;
  std::map<Span, std::size_t> readings_by_span;
  std::uint64_t transactions_executed = 0;
  std::size_t input_consumed = 0;
  Vertex extent = 0;
  bool finalized = false;
  /// Only the preset value of an untouched slot is void; every published
  /// snapshot is not.
  bool is_void = true;
};

/// Cover that maximizes the covered length, then prefers fewer pieces, then
/// a higher score sum, then lower edge ids.  At most one candidate per span
/// matters: the best-scoring one.
struct CoverCandidate {
  EdgeId edge;
  Vertex from;
  Vertex to;
  double score;
};

/// Builds snapshots from a parser between transactions.  Incremental: only
/// edges added and statuses set since the previous call are examined, so a
/// snapshot costs time in the number of spans, not the size of the chart.
class SnapshotAssembler {
 public:
  SnapshotAssembler(StrategyParams params, std::uint64_t run_id);

  ParseSnapshot assemble(const ChartParser& parser, std::uint64_t transactions,
                         std::size_t input_consumed, bool finalized);

 private:
  std::shared_ptr<const Analysis> analysis_for(const ChartParser& parser, EdgeId id);
  void absorb(const ChartParser& parser);
  void rescore_span(const ChartParser& parser, Span span);
  void list(const ChartParser& parser, EdgeId id);
  void refresh(const ChartParser& parser, EdgeId id);

  StrategyParams params_;
  std::uint64_t run_id_;
  std::size_t seen_edges_ = 0;
  std::size_t seen_status_changes_ = 0;
  Vertex extent_ = 0;
  std::map<Span, std::vector<EdgeId>> passive_by_span_;  // non-refinement passive edges
  std::map<Span, CoverCandidate> best_by_span_;          // consistent ones only
  std::map<EdgeId, std::shared_ptr<const Analysis>> cache_;
  std::map<Span, std::size_t> readings_by_span_;
  std::set<EdgeId> listed_;  // start-category edges and sticky fragments
  AnalysisList::Items sorted_;
  std::shared_ptr<const AnalysisList::Items> published_;
};
std::vector<CoverCandidate> optimal_cover(const std::vector<CoverCandidate>& candidates,
                                          Vertex extent);

struct DepthBreadthDelta {
  double breadth_gain = 0;
  std::int64_t depth_gain = 0;
};

/// Throws std::invalid_argument when the snapshots come from different runs.
DepthBreadthDelta depth_breadth_delta(const ParseSnapshot& prev, const ParseSnapshot& next);

/// Start-category analyses, one per line.  Used for the forest dump.
std::string render_forest(const ParseSnapshot& s, const Category& start_category);

/// One-line JSON object.  `with_fs` adds each analysis' structure.
std::string snapshot_json(const ParseSnapshot& s, bool with_fs);

}  // namespace anyparse
