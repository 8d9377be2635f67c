#include "derivation_oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>
#include <set>

#include "anyparse/feature_structure.hpp"
#include "anyparse/fs_notation.hpp"

namespace anyparse::oracle {

namespace {

// Memoized count of derivations of a category over words[i, j).  With
// `expand`, each rule application counts once per combination of
// alternatives of its disjunctive equations.
class DerivationCounter {
 public:
  DerivationCounter(const Grammar& grammar, const Lexicon& lexicon,
                    const std::vector<std::string>& words, bool expand = false)
      : grammar_(grammar), lexicon_(lexicon), words_(words), expand_(expand) {}

  std::uint64_t count(const Category& cat, std::size_t i, std::size_t j) {
    auto key = std::make_tuple(cat, i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::uint64_t total = 0;
    if (j == i + 1) {
      for (const auto& e : lexicon_.entries()) {
        if (e.word == words_[i] && e.category == cat) ++total;
      }
    }
    for (const auto& rule : grammar_.rules()) {
      if (rule.lhs == cat) total += weight(rule) * split(rule, 0, i, j);
    }
    memo_[key] = total;
    return total;
  }

 private:
  std::uint64_t weight(const GrammarRule& rule) const {
    std::uint64_t w = 1;
    if (!expand_) return w;
    for (const auto& eq : rule.equations) {
      if (!eq.final_only) w *= eq.alternatives.size();
    }
    return w;
  }

  // Ways to cover [at, j) with rule.rhs[k..] in non-empty pieces.
  std::uint64_t split(const GrammarRule& rule, std::size_t k, std::size_t at, std::size_t j) {
    if (k == rule.rhs.size()) return at == j ? 1 : 0;
    std::uint64_t ways = 0;
    const std::size_t remaining = rule.rhs.size() - k - 1;
    for (std::size_t end = at + 1; end + remaining <= j; ++end) {
      const std::uint64_t here = count(rule.rhs[k], at, end);
      if (here) ways += here * split(rule, k + 1, end, j);
    }
    return ways;
  }

  const Grammar& grammar_;
  const Lexicon& lexicon_;
  const std::vector<std::string>& words_;
  bool expand_;
  std::map<std::tuple<Category, std::size_t, std::size_t>, std::uint64_t> memo_;
};

}  // namespace

std::uint64_t count_derivations(const Grammar& grammar, const Lexicon& lexicon,
                                const std::vector<std::string>& words, const Category& category) {
  if (words.empty()) return 0;
  return DerivationCounter(grammar, lexicon, words).count(category, 0, words.size());
}

std::uint64_t count_constituents(const Grammar& grammar, const Lexicon& lexicon,
                                 const std::vector<std::string>& words) {
  std::set<Category> categories;
  for (const auto& r : grammar.rules()) categories.insert(r.lhs);
  for (const auto& e : lexicon.entries()) categories.insert(e.category);
  DerivationCounter counter(grammar, lexicon, words, true);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j <= words.size(); ++j) {
      for (const auto& c : categories) total += counter.count(c, i, j);
    }
  }
  return total;
}

namespace {

Path layout(const ConstituentPath& p) {
  Path out;
  if (p.constituent != 0) out.push_back(std::to_string(p.constituent));
  out.push_back(kHeadFeature);
  out.insert(out.end(), p.features.begin(), p.features.end());
  return out;
}

FeatureStructure equation_structure(const Equation& eq, std::size_t alternative) {
  FsBuilder b;
  const NodeId root = b.add_complex();
  const NodeId left = b.ensure_path(root, layout(eq.lhs));
  const auto& value = eq.alternatives.at(alternative);
  if (const auto* path = std::get_if<ConstituentPath>(&value)) {
    Path right = layout(*path);
    Path prefix(right.begin(), right.end() - 1);
    b.set_arc(b.ensure_path(root, prefix), right.back(), left);
  } else {
    const FeatureStructure& literal = std::get<FeatureStructure>(value);
    const NodeId imported = b.import(literal);
    Path l = layout(eq.lhs);
    Path prefix(l.begin(), l.end() - 1);
    b.set_arc(b.ensure_path(root, prefix), l.back(), imported);
  }
  return b.build(root);
}

}  // namespace

EagerEnumerator::EagerEnumerator(const Grammar& grammar, const Lexicon& lexicon,
                                 const std::vector<WordHypothesis>& hypotheses)
    : grammar_(grammar), lexicon_(lexicon) {
  for (const auto& h : hypotheses) {
    auto key = std::make_tuple(h.word, h.start, h.end);
    auto [it, fresh] = words_.emplace(key, h.score);
    if (!fresh) it->second = std::max(it->second, h.score);
    extent_ = std::max(extent_, h.end);
  }
}

const std::vector<EagerEnumerator::Built>& EagerEnumerator::build(const Category& category,
                                                                   Vertex from, Vertex to) {
  auto key = std::make_tuple(category, from, to);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  std::vector<Built> out;
  for (const auto& [w, score] : words_) {
    if (std::get<1>(w) != from || std::get<2>(w) != to) continue;
    for (const auto& e : lexicon_.entries()) {
      if (e.word != std::get<0>(w) || e.category != category) continue;
      out.push_back({"(" + category + ":l" + std::to_string(e.id) + " " + e.word + ")",
                     e.fs.embed({kHeadFeature}), score});
    }
  }
  for (const auto& rule : grammar_.rules()) {
    if (rule.lhs != category) continue;
    // Every sequence of child derivations tiling from..to.
    std::vector<const Built*> chosen;
    std::function<void(std::size_t, Vertex)> tile = [&](std::size_t k, Vertex at) {
      if (k == rule.rhs.size()) {
        if (at != to) return;
        std::vector<std::size_t> disjunctive;
        for (std::size_t e = 0; e < rule.equations.size(); ++e) {
          if (rule.equations[e].disjunctive()) disjunctive.push_back(e);
        }
        std::vector<std::size_t> pick(rule.equations.size(), 0);
        for (;;) {
          auto fs = Outcome<FeatureStructure>(FeatureStructure().embed({kHeadFeature}));
          double score = 1.0;
          for (std::size_t c = 0; c < chosen.size() && fs; ++c) {
            score = score * chosen[c]->score;
            fs = unify(*fs, chosen[c]->fs.embed({std::to_string(c + 1)}));
          }
          for (std::size_t e = 0; e < rule.equations.size() && fs; ++e) {
            fs = unify(*fs, equation_structure(rule.equations[e], pick[e]));
          }
          if (fs) {
            std::string d = "(" + category + ":r" + std::to_string(rule.id);
            for (std::size_t i = 0; i < disjunctive.size(); ++i) {
              d += (i == 0 ? "/" : ".") + std::to_string(pick[disjunctive[i]]);
            }
            for (const Built* c : chosen) d += " " + c->derivation;
            out.push_back({d + ")", std::move(fs).value(), score});
          }
          // Next combination, first disjunctive equation varying fastest.
          std::size_t i = 0;
          for (; i < disjunctive.size(); ++i) {
            const std::size_t e = disjunctive[i];
            if (++pick[e] < rule.equations[e].alternatives.size()) break;
            pick[e] = 0;
          }
          if (i == disjunctive.size()) break;
        }
        return;
      }
      const std::size_t remaining = rule.rhs.size() - k - 1;
      for (Vertex end = at + 1; end + remaining <= to; ++end) {
        for (const Built& child : build(rule.rhs[k], at, end)) {
          chosen.push_back(&child);
          tile(k + 1, end);
          chosen.pop_back();
        }
      }
    };
    tile(0, from);
  }
  return memo_[key] = std::move(out);
}

const std::vector<ForestItem>& EagerEnumerator::items(const Category& category, Vertex from,
                                                      Vertex to) {
  auto key = std::make_tuple(category, from, to);
  if (auto it = rendered_.find(key); it != rendered_.end()) return it->second;
  std::vector<ForestItem> out;
  for (const Built& b : build(category, from, to)) {
    out.push_back({b.derivation, to_string(b.fs), b.score});
  }
  std::sort(out.begin(), out.end());
  return rendered_[key] = std::move(out);
}

std::map<std::tuple<Category, Vertex, Vertex>, std::vector<ForestItem>> EagerEnumerator::all() {
  std::set<Category> categories;
  for (const auto& r : grammar_.rules()) categories.insert(r.lhs);
  for (const auto& e : lexicon_.entries()) categories.insert(e.category);
  std::map<std::tuple<Category, Vertex, Vertex>, std::vector<ForestItem>> out;
  for (const auto& c : categories) {
    for (Vertex i = 0; i <= extent_; ++i) {
      for (Vertex j = i + 1; j <= extent_; ++j) {
        const auto& v = items(c, i, j);
        if (!v.empty()) out[{c, i, j}] = v;
      }
    }
  }
  return out;
}

}  // namespace anyparse::oracle
