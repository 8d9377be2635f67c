#include "anyparse/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace anyparse {

void validate(const WordHypothesis& h) {
  if (h.word.empty()) throw std::invalid_argument("empty word");
  if (!(h.start < h.end)) {
    throw std::invalid_argument("hypothesis '" + h.word + "' has start " + std::to_string(h.start) +
                                " >= end " + std::to_string(h.end));
  }
  if (!(h.score >= 0.0 && h.score <= 1.0)) {
    throw std::invalid_argument("hypothesis '" + h.word + "' has score outside [0,1]");
  }
}

void Lattice::add(WordHypothesis h) {
  validate(h);
  vertex_count_ = std::max(vertex_count_, h.end);
  hypotheses_.push_back(std::move(h));
}

namespace {

template <class T>
bool parse_number(const std::string& s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<WordHypothesis> read_lattice(std::istream& in) {
  std::vector<WordHypothesis> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (fields.size() != 4) throw LatticeError(line_no, "expected 4 tab-separated fields");
    WordHypothesis h;
    h.word = fields[0];
    // from_chars for double is missing from older libstdc++; stod is fine here.
    std::size_t used = 0;
    if (!parse_number(fields[1], h.start) || !parse_number(fields[2], h.end)) {
      throw LatticeError(line_no, "start and end must be non-negative integers");
    }
    try {
      h.score = std::stod(fields[3], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != fields[3].size()) throw LatticeError(line_no, "bad score");
    try {
      validate(h);
    } catch (const std::invalid_argument& e) {
      throw LatticeError(line_no, e.what());
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<WordHypothesis> read_lattice_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LatticeError(0, "cannot read " + path);
  return read_lattice(in);
}

std::vector<WordHypothesis> single_path(const std::vector<std::string>& words) {
  std::vector<WordHypothesis> out;
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back({words[i], i, i + 1, 1.0});
  return out;
}

}  // namespace anyparse
