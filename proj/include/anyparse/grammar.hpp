#pragma once

// Grammar rules, lexical entries and their line-oriented file format.
//
//   # comment
//   Rule S -> NP VP
//     <1 agr> = <2 agr>
//     <0 tense> = <2 tense> !final
//     <1 case> = nom | obl
//   Lex dog N
//     <agr num> = sg
//     <agr> = [num: sg, pers: 3]
//
// Rule equations address constituents by index (0 is the left-hand side,
// 1..n the right-hand symbols).  Lexical equations address the word's own
// structure; a leading `0` is accepted and ignored.  `|` offers alternatives
// and `!final` defers an equation to the end of the utterance.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anyparse/feature_structure.hpp"

namespace anyparse {

using Category = std::string;

/// Feature under which an edge stores its left-hand-side structure.  The
/// right-hand constituents sit under features "1".."n".
inline const Feature kHeadFeature = "head-fs";

struct ConstituentPath {
  std::size_t constituent = 0;
  Path features;

  friend bool operator==(const ConstituentPath&, const ConstituentPath&) = default;
};

using EquationValue = std::variant<ConstituentPath, FeatureStructure>;

struct Equation {
  ConstituentPath lhs;
  std::vector<EquationValue> alternatives;  // non-empty; >1 means disjunctive
  bool final_only = false;
  int line = 0;

  bool disjunctive() const { return alternatives.size() > 1; }
  std::size_t max_constituent() const;
};

struct GrammarRule {
  std::size_t id = 0;
  Category lhs;
  std::vector<Category> rhs;
  std::vector<Equation> equations;
  int line = 0;
};

struct LexicalEntry {
  std::size_t id = 0;
  std::string word;
  Category category;
  FeatureStructure fs;  // the word's own structure, not the edge layout
  int line = 0;
};

class Grammar {
 public:
  const std::vector<GrammarRule>& rules() const { return rules_; }
  const GrammarRule& rule(std::size_t id) const { return rules_.at(id); }

  /// Ids of rules whose first right-hand symbol is `category`.
  std::span<const std::size_t> rules_starting_with(const Category& category) const;

  bool has_lhs(const Category& category) const { return lhs_.count(category) > 0; }

  GrammarRule& add_rule(GrammarRule rule);

 private:
  std::vector<GrammarRule> rules_;
  std::map<Category, std::vector<std::size_t>> by_first_;
  std::set<Category> lhs_;
};

class Lexicon {
 public:
  const std::vector<LexicalEntry>& entries() const { return entries_; }
  std::vector<const LexicalEntry*> lookup(std::string_view word) const;
  bool has_category(const Category& category) const;

  const LexicalEntry& add_entry(LexicalEntry entry);

 private:
  std::vector<LexicalEntry> entries_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_word_;
};

// ---------------------------------------------------------------------------
// Edge layout and equation constraints

/// `<0 f>` -> (head-fs f), `<i f>` -> (i head-fs f).
Path layout_path(const ConstituentPath& p);

/// Structure in which `a` and `b` reach one shared unconstrained node.
/// Throws CyclicStructureError when one path is a proper prefix of the other.
FeatureStructure path_equality_constraint(const Path& a, const Path& b);

/// `value` placed at `at`.
FeatureStructure path_value_constraint(const Path& at, const FeatureStructure& value);

/// One alternative of a rule equation, expressed in edge-layout coordinates.
FeatureStructure rule_equation_constraint(const Equation& eq, std::size_t alternative);

/// One alternative of a lexical equation, relative to the word structure.
FeatureStructure lexical_equation_constraint(const Equation& eq, std::size_t alternative);

std::string format_equation(const Equation& eq, bool rule_paths);

// ---------------------------------------------------------------------------
// Loading

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string source;
  int line = 0;
  std::string message;

  std::string to_string() const;
};

struct LoadResult {
  Grammar grammar;
  Lexicon lexicon;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

/// Parses grammar text into `into`.  Never throws for malformed input;
/// problems are reported as diagnostics with line numbers.
void load_grammar_text(LoadResult& into, std::string_view text, const std::string& source);

/// Loads every file (rules and lexicon may be split across them) and then
/// runs the cross-file checks.  An unreadable file is an error diagnostic.
LoadResult load_grammar_files(const std::vector<std::string>& paths);

/// Single-text convenience used by tests; runs the cross-file checks too.
LoadResult load_grammar_text(std::string_view text, const std::string& source = "<text>");

/// Right-hand categories that no rule or lexical entry can produce, and
/// duplicate rules (warning only).
void validate(LoadResult& result);

}  // namespace anyparse
