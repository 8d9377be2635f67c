#include "anyparse/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "anyparse/fs_notation.hpp"

namespace anyparse {

std::size_t Equation::max_constituent() const {
  std::size_t m = lhs.constituent;
  for (const auto& alt : alternatives) {
    if (const auto* p = std::get_if<ConstituentPath>(&alt)) m = std::max(m, p->constituent);
  }
  return m;
}

// ---------------------------------------------------------------------------

std::span<const std::size_t> Grammar::rules_starting_with(const Category& category) const {
  auto it = by_first_.find(category);
  if (it == by_first_.end()) return {};
  return it->second;
}

GrammarRule& Grammar::add_rule(GrammarRule rule) {
  rule.id = rules_.size();
  by_first_[rule.rhs.front()].push_back(rule.id);
  lhs_.insert(rule.lhs);
  rules_.push_back(std::move(rule));
  return rules_.back();
}

std::vector<const LexicalEntry*> Lexicon::lookup(std::string_view word) const {
  std::vector<const LexicalEntry*> out;
  auto it = by_word_.find(word);
  if (it == by_word_.end()) return out;
  for (std::size_t i : it->second) out.push_back(&entries_[i]);
  return out;
}

bool Lexicon::has_category(const Category& category) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const LexicalEntry& e) { return e.category == category; });
}

const LexicalEntry& Lexicon::add_entry(LexicalEntry entry) {
  entry.id = entries_.size();
  by_word_[entry.word].push_back(entry.id);
  entries_.push_back(std::move(entry));
  return entries_.back();
}

// ---------------------------------------------------------------------------

Path layout_path(const ConstituentPath& p) {
  Path out;
  out.reserve(p.features.size() + 2);
  if (p.constituent != 0) out.push_back(std::to_string(p.constituent));
  out.push_back(kHeadFeature);
  out.insert(out.end(), p.features.begin(), p.features.end());
  return out;
}

FeatureStructure path_equality_constraint(const Path& a, const Path& b) {
  FsBuilder builder;
  const NodeId top = builder.add_complex();
  const NodeId shared = builder.ensure_path(top, a);
  if (a == b) return builder.build(top);
  if (b.empty()) throw CyclicStructureError("path " + format_path(a) + " equated with the root");
  const NodeId parent = builder.ensure_path(top, Path(b.begin(), b.end() - 1));
  if (builder.arc(parent, b.back())) {
    // b is a proper prefix of a
    throw CyclicStructureError("path " + format_path(b) + " equated with its extension " +
                               format_path(a));
  }
  builder.set_arc(parent, b.back(), shared);
  return builder.build(top);
}

FeatureStructure path_value_constraint(const Path& at, const FeatureStructure& value) {
  return value.embed(at);
}

namespace {

FeatureStructure constraint_for(const Path& lhs, const EquationValue& value,
                                Path (*map_path)(const ConstituentPath&)) {
  if (const auto* p = std::get_if<ConstituentPath>(&value)) {
    return path_equality_constraint(lhs, map_path(*p));
  }
  return path_value_constraint(lhs, std::get<FeatureStructure>(value));
}

Path word_path(const ConstituentPath& p) { return p.features; }

}  // namespace

FeatureStructure rule_equation_constraint(const Equation& eq, std::size_t alternative) {
  return constraint_for(layout_path(eq.lhs), eq.alternatives.at(alternative), &layout_path);
}

FeatureStructure lexical_equation_constraint(const Equation& eq, std::size_t alternative) {
  return constraint_for(eq.lhs.features, eq.alternatives.at(alternative), &word_path);
}

namespace {

std::string format_constituent_path(const ConstituentPath& p, bool rule_paths) {
  Path shown;
  if (rule_paths) shown.push_back(std::to_string(p.constituent));
  shown.insert(shown.end(), p.features.begin(), p.features.end());
  return format_path(shown);
}

}  // namespace

std::string format_equation(const Equation& eq, bool rule_paths) {
  std::string out = format_constituent_path(eq.lhs, rule_paths) + " =";
  for (std::size_t i = 0; i < eq.alternatives.size(); ++i) {
    out += i ? " | " : " ";
    const auto& alt = eq.alternatives[i];
    if (const auto* p = std::get_if<ConstituentPath>(&alt)) {
      out += format_constituent_path(*p, rule_paths);
    } else {
      out += to_string(std::get<FeatureStructure>(alt));
    }
  }
  if (eq.final_only) out += " !final";
  return out;
}

std::string Diagnostic::to_string() const {
  std::string out = source + ":" + std::to_string(line) + ": ";
  out += severity == Severity::Error ? "error: " : "warning: ";
  return out + message;
}

bool LoadResult::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

// ---------------------------------------------------------------------------
// Loader

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct LineError {
  std::string message;
};

// Splits at '|' outside brackets.
std::vector<std::string_view> split_alternatives(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '[' || c == '<') ++depth;
    else if (c == ']' || c == '>') --depth;
    else if (c == '|' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

class Loader {
 public:
  Loader(LoadResult& out, const std::string& source) : out_(out), source_(source) {}

  void run(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
      ++line_no;
      handle_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    flush();
  }

 private:
  enum class Kind { None, Rule, Lex, Broken };

  void error(int line, const std::string& message) {
    out_.diagnostics.push_back({Diagnostic::Severity::Error, source_, line, message});
  }

  void handle_line(std::string_view raw, int line_no) {
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const bool indented = std::isspace(static_cast<unsigned char>(raw.front()));
    if (indented) {
      if (kind_ == Kind::None) {
        error(line_no, "equation outside of a Rule or Lex block");
        return;
      }
      if (kind_ == Kind::Broken) return;
      try {
        Equation eq = parse_equation(line, line_no);
        equations_.push_back(std::move(eq));
      } catch (const LineError& e) {
        error(line_no, e.message);
        has_error_ = true;
      }
      return;
    }
    flush();
    header_line_ = line_no;
    auto words = split_words(line);
    if (words[0] == "Rule") {
      if (words.size() < 4 || words[2] != "->") {
        error(line_no, "expected 'Rule LHS -> SYMBOL...'");
        kind_ = Kind::Broken;
        return;
      }
      kind_ = Kind::Rule;
      lhs_ = words[1];
      rhs_.assign(words.begin() + 3, words.end());
    } else if (words[0] == "Lex") {
      if (words.size() != 3) {
        error(line_no, "expected 'Lex WORD CATEGORY'");
        kind_ = Kind::Broken;
        return;
      }
      kind_ = Kind::Lex;
      word_ = words[1];
      lhs_ = words[2];
    } else {
      error(line_no, "unknown directive '" + words[0] + "'");
      kind_ = Kind::Broken;
    }
  }

  ConstituentPath parse_path(std::string_view text) {
    // text is the content between '<' and '>'
    auto words = split_words(text);
    ConstituentPath p;
    for (const auto& w : words) {
      if (!std::all_of(w.begin(), w.end(), is_symbol_char)) {
        throw LineError{"bad feature name '" + w + "'"};
      }
    }
    if (kind_ == Kind::Rule) {
      if (words.empty() || !std::all_of(words[0].begin(), words[0].end(),
                                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw LineError{"rule path must start with a constituent index"};
      }
      p.constituent = std::stoul(words[0]);
      if (p.constituent > rhs_.size()) {
        throw LineError{"constituent index " + words[0] + " out of range for " +
                        std::to_string(rhs_.size()) + "-symbol right-hand side"};
      }
      p.features.assign(words.begin() + 1, words.end());
    } else {
      std::size_t skip = (!words.empty() && words[0] == "0") ? 1 : 0;
      p.features.assign(words.begin() + skip, words.end());
    }
    return p;
  }

  ConstituentPath bracketed_path(std::string_view s) {
    if (s.size() < 2 || s.front() != '<' || s.back() != '>') throw LineError{"malformed path '" + std::string(s) + "'"};
    return parse_path(s.substr(1, s.size() - 2));
  }

  Equation parse_equation(std::string_view line, int line_no) {
    Equation eq;
    eq.line = line_no;
    if (line.front() != '<') throw LineError{"equation must start with a path"};
    auto close = line.find('>');
    if (close == line.npos) throw LineError{"unterminated path"};
    eq.lhs = parse_path(line.substr(1, close - 1));
    std::string_view rest = trim(line.substr(close + 1));
    if (rest.empty() || rest.front() != '=') throw LineError{"expected '=' after path"};
    rest = trim(rest.substr(1));
    constexpr std::string_view kFinal = "!final";
    if (rest.size() >= kFinal.size() && rest.substr(rest.size() - kFinal.size()) == kFinal) {
      eq.final_only = true;
      rest = trim(rest.substr(0, rest.size() - kFinal.size()));
    }
    if (rest.empty()) throw LineError{"missing right-hand side"};
    for (std::string_view alt : split_alternatives(rest)) {
      if (alt.empty()) throw LineError{"empty alternative"};
      if (alt.front() == '<') {
        eq.alternatives.emplace_back(bracketed_path(alt));
        continue;
      }
      try {
        eq.alternatives.emplace_back(parse_feature_structure(alt));
      } catch (const NotationError& e) {
        throw LineError{std::string("bad feature structure: ") + e.what()};
      } catch (const CyclicStructureError& e) {
        throw LineError{std::string("cyclic feature structure literal: ") + e.what()};
      }
    }
    if (eq.final_only && eq.disjunctive()) {
      throw LineError{"!final equations cannot be disjunctive"};
    }
    if (eq.final_only && kind_ == Kind::Lex) {
      throw LineError{"!final is only meaningful in rules"};
    }
    // Surface cyclic equations now rather than mid-parse.
    for (std::size_t i = 0; i < eq.alternatives.size(); ++i) {
      try {
        if (kind_ == Kind::Rule) (void)rule_equation_constraint(eq, i);
        else (void)lexical_equation_constraint(eq, i);
      } catch (const CyclicStructureError& e) {
        throw LineError{std::string("cyclic equation: ") + e.what()};
      }
    }
    return eq;
  }

  void flush() {
    if (kind_ == Kind::Rule && !has_error_) {
      GrammarRule rule;
      rule.lhs = lhs_;
      rule.rhs = rhs_;
      rule.equations = std::move(equations_);
      rule.line = header_line_;
      out_.grammar.add_rule(std::move(rule));
    } else if (kind_ == Kind::Lex && !has_error_) {
      expand_lexical_entry();
    }
    kind_ = Kind::None;
    has_error_ = false;
    equations_.clear();
    rhs_.clear();
  }

  // Disjunctive lexical equations expand into one entry per combination.
  void expand_lexical_entry() {
    std::vector<FeatureStructure> partial{FeatureStructure()};
    std::string last_failure;
    for (const auto& eq : equations_) {
      std::vector<FeatureStructure> next;
      for (const auto& fs : partial) {
        for (std::size_t i = 0; i < eq.alternatives.size(); ++i) {
          try {
            auto u = unify(fs, lexical_equation_constraint(eq, i));
            if (u) next.push_back(std::move(u).value());
            else last_failure = format_path(u.failure().path) + " " + u.failure().reason;
          } catch (const CyclicStructureError& e) {
            last_failure = e.what();
          }
        }
      }
      partial = std::move(next);
    }
    if (partial.empty()) {
      error(header_line_, "lexical entry '" + word_ + "' is inconsistent: " + last_failure);
      return;
    }
    for (auto& fs : partial) {
      out_.lexicon.add_entry({0, word_, lhs_, std::move(fs), header_line_});
    }
  }

  LoadResult& out_;
  std::string source_;
  Kind kind_ = Kind::None;
  bool has_error_ = false;
  int header_line_ = 0;
  Category lhs_;
  std::vector<Category> rhs_;
  std::string word_;
  std::vector<Equation> equations_;
};

}  // namespace

void load_grammar_text(LoadResult& into, std::string_view text, const std::string& source) {
  Loader(into, source).run(text);
}

LoadResult load_grammar_text(std::string_view text, const std::string& source) {
  LoadResult result;
  load_grammar_text(result, text, source);
  validate(result);
  return result;
}

LoadResult load_grammar_files(const std::vector<std::string>& paths) {
  LoadResult result;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      result.diagnostics.push_back({Diagnostic::Severity::Error, path, 0, "cannot read file"});
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    load_grammar_text(result, buf.str(), path);
  }
  validate(result);
  return result;
}

void validate(LoadResult& result) {
  const auto& rules = result.grammar.rules();
  for (const auto& rule : rules) {
    for (const auto& cat : rule.rhs) {
      if (!result.grammar.has_lhs(cat) && !result.lexicon.has_category(cat)) {
        result.diagnostics.push_back({Diagnostic::Severity::Error, "grammar", rule.line,
                                      "category '" + cat + "' in rule for " + rule.lhs +
                                          " is produced by no rule or lexical entry"});
      }
    }
  }
  auto signature = [](const GrammarRule& r) {
    std::string s = r.lhs + " ->";
    for (const auto& c : r.rhs) s += " " + c;
    for (const auto& eq : r.equations) s += "\n" + format_equation(eq, true);
    return s;
  };
  std::map<std::string, int> seen;
  for (const auto& rule : rules) {
    auto [it, inserted] = seen.emplace(signature(rule), rule.line);
    if (!inserted) {
      result.diagnostics.push_back({Diagnostic::Severity::Warning, "grammar", rule.line,
                                    "duplicate of the rule at line " + std::to_string(it->second)});
    }
  }
}

}  // namespace anyparse
