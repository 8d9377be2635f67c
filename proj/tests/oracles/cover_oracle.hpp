#pragma once

// Exhaustive search over every non-overlapping subset of fragments.  Only
// usable for a handful of candidates.

#include <cstddef>
#include <tuple>
#include <vector>

#include "anyparse/snapshot.hpp"

namespace anyparse::oracle {

struct CoverScore {
  Vertex covered = 0;
  std::size_t pieces = 0;
  double score = 0;

  // Larger covered, then fewer pieces, then larger score.
  bool better_than(const CoverScore& o) const {
    return std::make_tuple(covered, -static_cast<long>(pieces), score) >
           std::make_tuple(o.covered, -static_cast<long>(o.pieces), o.score);
  }
};

inline CoverScore score_of(const std::vector<CoverCandidate>& cover) {
  CoverScore s;
  for (const auto& c : cover) {
    s.covered += c.to - c.from;
    ++s.pieces;
    s.score += c.score;
  }
  return s;
}

inline CoverScore best_cover_score(const std::vector<CoverCandidate>& candidates, Vertex extent) {
  CoverScore best;
  std::vector<bool> used(extent, false);
  std::vector<CoverCandidate> chosen;
  auto search = [&](auto& self, std::size_t i) -> void {
    if (i == candidates.size()) {
      const CoverScore s = score_of(chosen);
      if (s.better_than(best)) best = s;
      return;
    }
    self(self, i + 1);
    const auto& c = candidates[i];
    if (c.from >= c.to || c.to > extent) return;
    for (Vertex v = c.from; v < c.to; ++v) {
      if (used[v]) return;
    }
    for (Vertex v = c.from; v < c.to; ++v) used[v] = true;
    chosen.push_back(c);
    self(self, i + 1);
    chosen.pop_back();
    for (Vertex v = c.from; v < c.to; ++v) used[v] = false;
  };
  search(search, 0);
  return best;
}

}  // namespace anyparse::oracle
