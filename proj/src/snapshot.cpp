#include "anyparse/snapshot.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "anyparse/fs_notation.hpp"

namespace anyparse {

void StrategyParams::validate() const {
  if (publish_every == 0) throw std::invalid_argument("publish_every must be at least 1");
  if (beam && *beam == 0) throw std::invalid_argument("beam must be at least 1");
  if (start_category.empty()) throw std::invalid_argument("empty start category");
}

const char* to_string(AnalysisStatus s) {
  switch (s) {
    case AnalysisStatus::Partial: return "partial";
    case AnalysisStatus::Final: return "final";
    case AnalysisStatus::Inconsistent: return "inconsistent";
  }
  return "?";
}

namespace {

AnalysisStatus status_of(const ChartParser& p, EdgeId id) {
  switch (p.final_status(id)) {
    case FinalStatus::Open: return AnalysisStatus::Partial;
    case FinalStatus::Final: return AnalysisStatus::Final;
    case FinalStatus::Inconsistent: return AnalysisStatus::Inconsistent;
  }
  return AnalysisStatus::Partial;
}

// Lexicographic objective of a cover: longer, fewer pieces, higher score sum.
struct CoverValue {
  Vertex covered = 0;
  std::size_t pieces = 0;
  double score = 0;

  bool better_than(const CoverValue& o) const {
    if (covered != o.covered) return covered > o.covered;
    if (pieces != o.pieces) return pieces < o.pieces;
    return score > o.score;
  }
};

}  // namespace

std::vector<CoverCandidate> optimal_cover(const std::vector<CoverCandidate>& candidates,
                                          Vertex extent) {
  // Best candidate per span.
  std::map<Span, CoverCandidate> best;
  for (const auto& c : candidates) {
    if (c.to > extent || c.from >= c.to) continue;
    auto [it, fresh] = best.emplace(Span{c.from, c.to}, c);
    if (!fresh && (c.score > it->second.score ||
                   (c.score == it->second.score && c.edge < it->second.edge))) {
      it->second = c;
    }
  }
  std::vector<std::vector<const CoverCandidate*>> ending(extent + 1);
  for (const auto& [span, c] : best) ending[span.second].push_back(&c);

  std::vector<CoverValue> value(extent + 1);
  std::vector<const CoverCandidate*> last(extent + 1, nullptr);  // null: gap
  for (Vertex v = 1; v <= extent; ++v) {
    value[v] = value[v - 1];
    for (const CoverCandidate* c : ending[v]) {
      CoverValue with = value[c->from];
      with.covered += c->to - c->from;
      with.pieces += 1;
      with.score += c->score;
      if (with.better_than(value[v]) || (last[v] && !value[v].better_than(with) &&
                                         c->edge < last[v]->edge)) {
        value[v] = with;
        last[v] = c;
      }
    }
  }
  std::vector<CoverCandidate> out;
  for (Vertex v = extent; v > 0;) {
    if (last[v]) {
      out.push_back(*last[v]);
      v = last[v]->from;
    } else {
      --v;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

SnapshotAssembler::SnapshotAssembler(StrategyParams params, std::uint64_t run_id)
    : params_(std::move(params)), run_id_(run_id) {
  params_.validate();
}

std::shared_ptr<const Analysis> SnapshotAssembler::analysis_for(const ChartParser& parser,
                                                                EdgeId id) {
  const Edge& e = parser.chart().edge(id);
  const AnalysisStatus status = status_of(parser, id);
  const bool complete =
      e.category() == params_.start_category && e.from == 0 && e.to == extent_ && extent_ > 0;
  auto& slot = cache_[id];
  if (slot && slot->status == status && slot->complete == complete) return slot;
  auto a = std::make_shared<Analysis>();
  a->edge = id;
  a->category = e.category();
  a->from = e.from;
  a->to = e.to;
  a->score = e.score;
  const auto refined = parser.refined(id);
  a->fs = refined ? parser.chart().edge(*refined).fs : e.fs;
  a->derivation = slot ? slot->derivation : derivation(parser.chart(), id);
  a->complete = complete;
  a->status = status;
  slot = std::move(a);
  return slot;
}

namespace {

bool listed_before(const std::shared_ptr<const Analysis>& a, const std::shared_ptr<const Analysis>& b) {
  if (a->score != b->score) return a->score > b->score;
  return a->edge < b->edge;
}

bool better_candidate(const CoverCandidate& a, const CoverCandidate& b) {
  return a.score > b.score || (a.score == b.score && a.edge < b.edge);
}

}  // namespace

void SnapshotAssembler::absorb(const ChartParser& parser) {
  const auto& edges = parser.chart().edges();
  for (; seen_edges_ < edges.size(); ++seen_edges_) {
    const Edge& e = edges[seen_edges_];
    if (!e.passive() || e.refines) continue;
    const Span span{e.from, e.to};
    passive_by_span_[span].push_back(e.id);
    if (parser.final_status(e.id) != FinalStatus::Inconsistent) {
      const CoverCandidate c{e.id, e.from, e.to, e.score};
      auto [it, fresh] = best_by_span_.emplace(span, c);
      if (!fresh && better_candidate(c, it->second)) it->second = c;
    }
    if (e.category() == params_.start_category) {
      ++readings_by_span_[span];
      list(parser, e.id);
    }
  }
  const auto& changes = parser.status_changes();
  for (; seen_status_changes_ < changes.size(); ++seen_status_changes_) {
    const EdgeId id = changes[seen_status_changes_];
    if (listed_.count(id)) refresh(parser, id);
    if (parser.final_status(id) == FinalStatus::Inconsistent) {
      const Edge& e = parser.chart().edge(id);
      rescore_span(parser, {e.from, e.to});
    }
  }
}

void SnapshotAssembler::rescore_span(const ChartParser& parser, Span span) {
  best_by_span_.erase(span);
  auto it = passive_by_span_.find(span);
  if (it == passive_by_span_.end()) return;
  for (EdgeId id : it->second) {
    if (parser.final_status(id) == FinalStatus::Inconsistent) continue;
    const Edge& e = parser.chart().edge(id);
    const CoverCandidate c{id, e.from, e.to, e.score};
    auto [b, fresh] = best_by_span_.emplace(span, c);
    if (!fresh && better_candidate(c, b->second)) b->second = c;
  }
}

void SnapshotAssembler::list(const ChartParser& parser, EdgeId id) {
  if (!listed_.insert(id).second) return;
  auto a = analysis_for(parser, id);
  sorted_.insert(std::lower_bound(sorted_.begin(), sorted_.end(), a, listed_before), std::move(a));
  published_.reset();
}

void SnapshotAssembler::refresh(const ChartParser& parser, EdgeId id) {
  auto before = cache_[id];
  auto after = analysis_for(parser, id);
  if (before == after) return;
  auto pos = std::lower_bound(sorted_.begin(), sorted_.end(), after, listed_before);
  *pos = std::move(after);
  published_.reset();
}

ParseSnapshot SnapshotAssembler::assemble(const ChartParser& parser, std::uint64_t transactions,
                                          std::size_t input_consumed, bool finalized) {
  const Vertex extent = parser.lattice().vertex_count();
  const bool extent_changed = extent != extent_;
  extent_ = extent;
  absorb(parser);
  if (extent_changed) {
    for (EdgeId id : listed_) refresh(parser, id);
  }

  ParseSnapshot s;
  s.run_id = run_id_;
  s.transactions_executed = transactions;
  s.input_consumed = input_consumed;
  s.extent = extent_;
  s.finalized = finalized;
  s.is_void = false;

  std::vector<CoverCandidate> candidates;
  candidates.reserve(best_by_span_.size());
  for (const auto& [span, c] : best_by_span_) candidates.push_back(c);
  Vertex covered = 0;
  for (const auto& c : optimal_cover(candidates, extent_)) {
    s.cover.push_back({c.edge, parser.chart().edge(c.edge).category(), c.from, c.to});
    covered += c.to - c.from;
  }
  s.coverage = extent_ == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(extent_);

  if (params_.fragment_first) {
    for (const auto& piece : s.cover) list(parser, piece.edge);
  }
  if (!published_) published_ = std::make_shared<const AnalysisList::Items>(sorted_);
  s.analyses = AnalysisList(published_);

  s.readings_by_span = readings_by_span_;
  for (const auto& [span, n] : readings_by_span_) {
    const Vertex len = span.second - span.first;
    if (!s.best_span || len > s.best_span->second - s.best_span->first) s.best_span = span;
  }
  if (s.best_span) s.readings = readings_by_span_.at(*s.best_span);
  return s;
}

DepthBreadthDelta depth_breadth_delta(const ParseSnapshot& prev, const ParseSnapshot& next) {
  if (prev.run_id != next.run_id) {
    throw std::invalid_argument("snapshots from different runs (" + std::to_string(prev.run_id) +
                                " vs " + std::to_string(next.run_id) + ")");
  }
  DepthBreadthDelta d;
  d.breadth_gain = next.coverage - prev.coverage;
  if (prev.best_span) {
    auto it = next.readings_by_span.find(*prev.best_span);
    const std::size_t now = it == next.readings_by_span.end() ? 0 : it->second;
    d.depth_gain = static_cast<std::int64_t>(now) - static_cast<std::int64_t>(prev.readings);
  }
  return d;
}

std::string render_forest(const ParseSnapshot& s, const Category& start_category) {
  std::ostringstream out;
  out << std::setprecision(6);
  for (const auto& a : s.analyses) {
    if (a->category != start_category) continue;
    out << a->score << '\t' << a->from << '-' << a->to << '\t' << to_string(a->status)
        << (a->complete ? "\tcomplete\t" : "\tpartial-span\t") << a->derivation << '\t'
        << to_string(a->fs) << '\n';
  }
  return out.str();
}

std::string snapshot_json(const ParseSnapshot& s, bool with_fs) {
  nlohmann::json j;
  j["run"] = s.run_id;
  j["void"] = s.is_void;
  j["transactions"] = s.transactions_executed;
  j["input_consumed"] = s.input_consumed;
  j["extent"] = s.extent;
  j["finalized"] = s.finalized;
  j["coverage"] = s.coverage;
  j["readings"] = s.readings;
  j["best_span"] = s.best_span ? nlohmann::json::array({s.best_span->first, s.best_span->second})
                               : nlohmann::json(nullptr);
  auto& analyses = j["analyses"] = nlohmann::json::array();
  for (const auto& a : s.analyses) {
    nlohmann::json x{{"edge", a->edge},         {"category", a->category},
                     {"span", {a->from, a->to}}, {"score", a->score},
                     {"complete", a->complete},  {"status", to_string(a->status)},
                     {"derivation", a->derivation}};
    if (with_fs) x["fs"] = to_string(a->fs);
    analyses.push_back(std::move(x));
  }
  auto& cover = j["cover"] = nlohmann::json::array();
  for (const auto& c : s.cover) {
    cover.push_back({{"edge", c.edge}, {"category", c.category}, {"span", {c.from, c.to}}});
  }
  return j.dump();
}

}  // namespace anyparse
