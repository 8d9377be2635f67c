#include "anyparse/chart.hpp"

#include <algorithm>
#include <limits>

namespace anyparse {

namespace {

const std::vector<EdgeId>& empty_ids() {
  static const std::vector<EdgeId> none;
  return none;
}

constexpr std::size_t kLexicalOrigin = std::numeric_limits<std::size_t>::max() / 2;

}  // namespace

Chart::Key Chart::key_of(const Edge& e) {
  return Key{e.from,     e.to,       e.lexical() ? kLexicalOrigin + e.entry->id : e.rule->id,
             e.dot,      e.children, e.choices,
             e.refines};
}

std::optional<EdgeId> Chart::insert(Edge edge) {
  if (!keys_.insert(key_of(edge)).second) return std::nullopt;
  edge.id = static_cast<EdgeId>(edges_.size());
  const EdgeId id = edge.id;
  if (!edge.refines) {
    if (edge.passive()) passive_by_start_[edge.from].push_back(id);
    else active_by_end_[edge.to].push_back(id);
  }
  edges_.push_back(std::move(edge));
  return id;
}

const std::vector<EdgeId>& Chart::active_ending_at(Vertex v) const {
  auto it = active_by_end_.find(v);
  return it == active_by_end_.end() ? empty_ids() : it->second;
}

const std::vector<EdgeId>& Chart::passive_starting_at(Vertex v) const {
  auto it = passive_by_start_.find(v);
  return it == passive_by_start_.end() ? empty_ids() : it->second;
}

bool Chart::contains_active(std::size_t rule_id, Vertex at) const {
  const auto& ids = active_ending_at(at);
  return std::any_of(ids.begin(), ids.end(), [&](EdgeId id) {
    const Edge& e = edges_[id];
    return e.dot == 0 && e.from == at && e.rule->id == rule_id;
  });
}

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Scan: return "scan";
    case TaskKind::Combine: return "combine";
    case TaskKind::Predict: return "predict";
    case TaskKind::Finalize: return "finalize";
  }
  return "?";
}

void Agenda::push(Task task) {
  entries_.insert(Entry{task.priority, next_seq_++, std::move(task)});
  if (beam_ && entries_.size() > *beam_) {
    entries_.erase(std::prev(entries_.end()));
    ++dropped_;
  }
}

std::optional<Task> Agenda::pop() {
  if (entries_.empty()) return std::nullopt;
  auto node = entries_.extract(entries_.begin());
  return std::move(node.value().task);
}

bool Agenda::contains(TaskKind kind) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.task.kind == kind; });
}

}  // namespace anyparse
