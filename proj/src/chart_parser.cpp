#include "anyparse/chart_parser.hpp"

#include <cassert>
#include <stdexcept>

#include "anyparse/fs_notation.hpp"

namespace anyparse {

double combine_scores(double a, double b) { return a * b; }

ChartParser::ChartParser(std::shared_ptr<const Grammar> grammar,
                         std::shared_ptr<const Lexicon> lexicon, ParserOptions options)
    : grammar_(std::move(grammar)), lexicon_(std::move(lexicon)), agenda_(options.beam) {
  for (const GrammarRule& rule : grammar_->rules()) {
    CompiledRule c;
    c.steps.resize(rule.rhs.size());
    for (std::size_t e = 0; e < rule.equations.size(); ++e) {
      const Equation& eq = rule.equations[e];
      const std::string origin = "rule " + rule.lhs + " line " + std::to_string(eq.line);
      if (eq.final_only) {
        c.finals.push_back({rule_equation_constraint(eq, 0), origin});
        continue;
      }
      // Equations mentioning only the left-hand side run with the first step.
      const std::size_t position = std::max<std::size_t>(eq.max_constituent(), 1);
      Step& step = c.steps.at(position - 1);
      step.equations.push_back(e);
      std::vector<FeatureStructure> alternatives;
      for (std::size_t a = 0; a < eq.alternatives.size(); ++a) {
        alternatives.push_back(rule_equation_constraint(eq, a));
      }
      step.combinations *= static_cast<std::uint32_t>(alternatives.size());
      step.constraints.push_back(std::move(alternatives));
    }
    compiled_.push_back(std::move(c));
  }
}

void ChartParser::feed(WordHypothesis hypothesis) {
  if (input_ended_) throw std::logic_error("feed after end of input");
  const double score = hypothesis.score;
  lattice_.add(std::move(hypothesis));
  Task t;
  t.kind = TaskKind::Scan;
  t.priority = score;
  t.hypothesis = lattice_.size() - 1;
  agenda_.push(t);
}

std::uint32_t ChartParser::disjunct_count(const GrammarRule& rule, std::size_t position) const {
  return compiled_.at(rule.id).steps.at(position - 1).combinations;
}

bool ChartParser::category_check(const Edge& active, const Edge& passive) {
  ++stats_.category_checks;
  const Category* next = active.next_category();
  return next != nullptr && passive.passive() && active.to == passive.from &&
         *next == passive.category();
}

Outcome<Edge> ChartParser::fundamental_rule(const Edge& active, const Edge& passive,
                                            std::optional<std::uint32_t> disjunct) {
  if (active.passive() || !passive.passive() || active.to != passive.from ||
      *active.next_category() != passive.category()) {
    throw std::logic_error("fundamental rule applied to edges failing the category check");
  }
  ++stats_.unifications;
  const GrammarRule& rule = *active.rule;
  const std::size_t position = active.dot + 1;
  const Step& step = compiled_.at(rule.id).steps.at(position - 1);
  std::uint32_t selector = disjunct.value_or(0);
  if (selector >= step.combinations) {
    throw std::out_of_range("disjunct " + std::to_string(selector) + " of " +
                            std::to_string(step.combinations));
  }

  Edge next;
  next.from = active.from;
  next.to = passive.to;
  next.rule = active.rule;
  next.dot = position;
  next.score = combine_scores(active.score, passive.score);
  next.children = active.children;
  next.children.push_back(passive.id);
  next.choices = active.choices;
  next.choices.resize(rule.equations.size(), 0);

  const std::string slot = std::to_string(position);
  auto fs = unify(active.fs, passive.fs.embed({slot}));
  for (std::size_t i = 0; fs && i < step.equations.size(); ++i) {
    const auto& alternatives = step.constraints[i];
    const auto n = static_cast<std::uint32_t>(alternatives.size());
    const std::uint32_t choice = selector % n;
    selector /= n;
    next.choices[step.equations[i]] = choice;
    if (n > 1) {
      Disjunction d(alternatives, "rule " + std::to_string(rule.id));
      fs = unify_one_disjunct(fs.value(), d, choice);
    } else {
      fs = unify(fs.value(), alternatives.front());
    }
  }
  if (!fs) {
    ++stats_.unification_failures;
    return fs.failure();
  }
  next.fs = std::move(fs).value();

  next.pending_final = active.pending_final;
  for (const auto& d : passive.pending_final) {
    next.pending_final.push_back({d.constraint.embed({slot}), d.origin});
  }
  if (next.passive()) {
    const auto& finals = compiled_.at(rule.id).finals;
    next.pending_final.insert(next.pending_final.end(), finals.begin(), finals.end());
  }
  return next;
}

std::optional<EdgeId> ChartParser::add_edge(Edge edge) {
  auto id = chart_.insert(std::move(edge));
  if (id) schedule_for(chart_.edge(*id));
  return id;
}

void ChartParser::schedule_combines(const Edge& active, const Edge& passive) {
  if (!category_check(active, passive)) return;
  Task t;
  t.kind = TaskKind::Combine;
  t.priority = combine_scores(active.score, passive.score);
  t.active = active.id;
  t.passive = passive.id;
  const std::uint32_t n = disjunct_count(*active.rule, active.dot + 1);
  if (n == 1) {
    agenda_.push(t);
    return;
  }
  for (std::uint32_t d = 0; d < n; ++d) {
    t.disjunct = d;
    agenda_.push(t);
  }
}

void ChartParser::schedule_for(const Edge& edge) {
  if (edge.passive()) {
    // Copy: scheduling never inserts, but keep the index walk independent.
    const std::vector<EdgeId> actives = chart_.active_ending_at(edge.from);
    for (EdgeId a : actives) schedule_combines(chart_.edge(a), edge);
    for (std::size_t rule_id : grammar_->rules_starting_with(edge.category())) {
      Task t;
      t.kind = TaskKind::Predict;
      t.priority = edge.score;
      t.passive = edge.id;
      t.rule = rule_id;
      agenda_.push(t);
    }
  } else {
    const std::vector<EdgeId> passives = chart_.passive_starting_at(edge.to);
    for (EdgeId p : passives) schedule_combines(edge, chart_.edge(p));
  }
}

std::vector<EdgeId> ChartParser::scan(std::size_t index) {
  const WordHypothesis& h = lattice_.hypotheses().at(index);
  std::vector<EdgeId> added;
  auto entries = lexicon_->lookup(h.word);
  if (entries.empty()) {
    warnings_.push_back("unknown word '" + h.word + "' at " + std::to_string(h.start) + "-" +
                        std::to_string(h.end));
    return added;
  }
  for (const LexicalEntry* entry : entries) {
    Edge e;
    e.from = h.start;
    e.to = h.end;
    e.entry = entry;
    e.fs = entry->fs.embed({kHeadFeature});
    e.score = h.score;
    e.hypothesis = index;
    if (auto id = add_edge(std::move(e))) added.push_back(*id);
  }
  return added;
}

std::optional<EdgeId> ChartParser::predict_rule(const Edge& passive, std::size_t rule_id) {
  const GrammarRule& rule = grammar_->rule(rule_id);
  Edge e;
  e.from = passive.from;
  e.to = passive.from;
  e.rule = &rule;
  e.dot = 0;
  e.fs = FeatureStructure().embed({kHeadFeature});
  e.score = 1.0;
  e.choices.assign(rule.equations.size(), 0);
  return add_edge(std::move(e));
}

std::vector<EdgeId> ChartParser::predict(const Edge& passive) {
  std::vector<EdgeId> added;
  if (!passive.passive()) return added;
  for (std::size_t rule_id : grammar_->rules_starting_with(passive.category())) {
    if (auto id = predict_rule(passive, rule_id)) added.push_back(*id);
  }
  return added;
}

void ChartParser::run_combine(const Task& task, TransactionOutcome& out) {
  const Edge& active = chart_.edge(task.active);
  const Edge& passive = chart_.edge(task.passive);
  if (!category_check(active, passive)) return;
  auto result = fundamental_rule(active, passive, task.disjunct);
  if (!result) {
    ++out.failures;
    return;
  }
  if (auto id = add_edge(std::move(result).value())) out.edges_added.push_back(*id);
}

void ChartParser::run_finalize(const Task& task, TransactionOutcome& out) {
  const Edge& original = chart_.edge(task.edge);
  auto fs = Outcome<FeatureStructure>(original.fs);
  for (const auto& d : original.pending_final) {
    fs = unify(fs.value(), d.constraint);
    if (!fs) break;
  }
  if (!fs) {
    ++out.failures;
    ++stats_.finalize_failures;
    final_status_[original.id] = FinalStatus::Inconsistent;
    status_changes_.push_back(original.id);
    return;
  }
  Edge refined = original;
  refined.fs = std::move(fs).value();
  refined.pending_final.clear();
  refined.refines = original.id;
  const EdgeId original_id = original.id;
  if (auto id = chart_.insert(std::move(refined))) {
    out.edges_added.push_back(*id);
    refined_[original_id] = *id;
  }
  final_status_[original_id] = FinalStatus::Final;
  status_changes_.push_back(original_id);
}

TransactionOutcome ChartParser::step() {
  TransactionOutcome out;
  auto task = agenda_.pop();
  if (!task) return out;
  const auto started = std::chrono::steady_clock::now();
  out.kind = task->kind;
  switch (task->kind) {
    case TaskKind::Scan:
      out.edges_added = scan(task->hypothesis);
      break;
    case TaskKind::Combine:
      run_combine(*task, out);
      break;
    case TaskKind::Predict:
      if (auto id = predict_rule(chart_.edge(task->passive), task->rule)) {
        out.edges_added.push_back(*id);
      }
      break;
    case TaskKind::Finalize:
      run_finalize(*task, out);
      break;
  }
  ++stats_.transactions;
  out.duration = std::chrono::steady_clock::now() - started;
  return out;
}

std::vector<EdgeId> ChartParser::finalize_utterance() {
  if (!input_ended_) throw std::logic_error("finalize_utterance before end of input");
  if (!agenda_.empty()) throw std::logic_error("finalize_utterance with parsing work pending");
  std::vector<EdgeId> scheduled;
  if (finalization_started_) return scheduled;
  finalization_started_ = true;
  for (const Edge& e : chart_.edges()) {
    if (!e.passive() || e.refines) continue;
    if (e.pending_final.empty()) {
      final_status_[e.id] = FinalStatus::Final;
      status_changes_.push_back(e.id);
      continue;
    }
    Task t;
    t.kind = TaskKind::Finalize;
    t.priority = e.score;
    t.edge = e.id;
    agenda_.push(t);
    scheduled.push_back(e.id);
  }
  return scheduled;
}

FinalStatus ChartParser::final_status(EdgeId id) const {
  auto it = final_status_.find(id);
  return it == final_status_.end() ? FinalStatus::Open : it->second;
}

std::optional<EdgeId> ChartParser::refined(EdgeId id) const {
  auto it = refined_.find(id);
  if (it == refined_.end()) return std::nullopt;
  return it->second;
}

std::string derivation(const Chart& chart, EdgeId id) {
  const Edge& e = chart.edge(id);
  if (e.lexical()) {
    return "(" + e.category() + ":l" + std::to_string(e.entry->id) + " " + e.entry->word + ")";
  }
  std::string out = "(" + e.category() + ":r" + std::to_string(e.rule->id);
  bool first = true;
  for (std::size_t i = 0; i < e.rule->equations.size(); ++i) {
    if (!e.rule->equations[i].disjunctive()) continue;
    out += first ? "/" : ".";
    first = false;
    out += std::to_string(e.choices.at(i));
  }
  for (EdgeId child : e.children) out += " " + derivation(chart, child);
  return out + ")";
}

}  // namespace anyparse
