#pragma once

// Scored word hypotheses over integer time vertices.
//
// Lattice file: one hypothesis per line, `word<TAB>start<TAB>end<TAB>score`.
// Blank lines and lines starting with '#' are ignored.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace anyparse {

using Vertex = std::size_t;

struct WordHypothesis {
  std::string word;
  Vertex start = 0;
  Vertex end = 0;
  double score = 1.0;

  friend bool operator==(const WordHypothesis&, const WordHypothesis&) = default;
};

class LatticeError : public std::runtime_error {
 public:
  LatticeError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Throws std::invalid_argument unless start < end and score is in [0,1].
void validate(const WordHypothesis& h);

/// Hypotheses in arrival order.  vertex_count is the largest end vertex seen,
/// so vertices run 0..vertex_count.
class Lattice {
 public:
  void add(WordHypothesis h);

  const std::vector<WordHypothesis>& hypotheses() const { return hypotheses_; }
  std::size_t size() const { return hypotheses_.size(); }
  Vertex vertex_count() const { return vertex_count_; }

 private:
  std::vector<WordHypothesis> hypotheses_;
  Vertex vertex_count_ = 0;
};

std::vector<WordHypothesis> read_lattice(std::istream& in);
std::vector<WordHypothesis> read_lattice_file(const std::string& path);

/// A single-path lattice: word i spans i..i+1 with score 1.
std::vector<WordHypothesis> single_path(const std::vector<std::string>& words);

}  // namespace anyparse
