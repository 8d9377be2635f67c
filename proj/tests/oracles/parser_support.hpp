#pragma once

// Helpers that drive a ChartParser directly, for comparisons with the
// reference enumerators.

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "anyparse/chart_parser.hpp"
#include "anyparse/fs_notation.hpp"
#include "anyparse/grammar.hpp"
#include "derivation_oracle.hpp"

namespace anyparse::oracle {

struct Loaded {
  std::shared_ptr<const Grammar> grammar;
  std::shared_ptr<const Lexicon> lexicon;
};

inline Loaded load_or_throw(const LoadResult& r) {
  if (!r.ok()) {
    std::string all;
    for (const auto& d : r.diagnostics) all += d.to_string() + "\n";
    throw std::runtime_error("grammar does not load:\n" + all);
  }
  return {std::make_shared<const Grammar>(r.grammar), std::make_shared<const Lexicon>(r.lexicon)};
}

inline Loaded load_text(const std::string& text) { return load_or_throw(load_grammar_text(text)); }

/// Feeds everything, parses to quiescence and finalizes.
inline void run_to_completion(ChartParser& p, const std::vector<WordHypothesis>& hyps) {
  for (const auto& h : hyps) p.feed(h);
  p.end_input();
  while (p.has_work()) p.step();
  p.finalize_utterance();
  while (p.has_work()) p.step();
}

/// Final analyses per (category, span): finalization products replace their
/// originals and inconsistent edges drop out.
inline std::map<std::tuple<Category, Vertex, Vertex>, std::vector<ForestItem>> parser_forest(
    const ChartParser& p) {
  std::map<std::tuple<Category, Vertex, Vertex>, std::vector<ForestItem>> out;
  for (const Edge& e : p.chart().edges()) {
    if (!e.passive() || e.refines) continue;
    if (p.final_status(e.id) == FinalStatus::Inconsistent) continue;
    const Edge& shown = p.refined(e.id) ? p.chart().edge(*p.refined(e.id)) : e;
    out[{e.category(), e.from, e.to}].push_back(
        {derivation(p.chart(), e.id), to_string(shown.fs), shown.score});
  }
  for (auto& [_, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace anyparse::oracle
