#pragma once

// The checked-in grammar/lattice pairs.

#include <string>
#include <vector>

namespace anyparse::oracle {

struct FixtureCase {
  std::string name;
  std::vector<std::string> grammar_files;  // relative to the fixture dir
  std::string lattice;
  bool has_final_equations = false;
};

inline std::vector<FixtureCase> fixture_cases() {
  return {
      {"toy-simple", {"toy.grammar", "toy.lexicon"}, "simple.lattice"},
      {"toy-telescope", {"toy.grammar", "toy.lexicon"}, "telescope.lattice"},
      {"toy-speech", {"toy.grammar", "toy.lexicon"}, "speech.lattice"},
      {"toy-fragments", {"toy.grammar", "toy.lexicon"}, "fragments.lattice"},
      {"final", {"final.grammar"}, "final.lattice", true},
      {"final-clash", {"final.grammar"}, "final_clash.lattice", true},
      {"ambiguous", {"ambiguous.grammar"}, "ambiguous.lattice"},
      {"arrow", {"ambiguous.grammar"}, "arrow.lattice"},
  };
}

inline std::string fixture_path(const std::string& dir, const std::string& file) {
  return dir + "/" + file;
}

}  // namespace anyparse::oracle
