#pragma once

// Text notation for feature structures, shared by grammar files, tests and
// debug dumps:
//
//   fs      := tagged | complex | atom
//   tagged  := '#' digits [fs]          coreference tag; later bare uses share
//   complex := '[' [feature ':' fs (',' feature ':' fs)*] ']'
//   atom    := symbol
//
// Symbols and feature names are runs of characters other than whitespace and
// `[ ] : , # < > | = !`.  Rendering is canonical: arcs in feature order, tags
// only on nodes reached by more than one arc, numbered by first appearance.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "anyparse/feature_structure.hpp"

namespace anyparse {

class NotationError : public std::runtime_error {
 public:
  NotationError(std::size_t offset, const std::string& message)
      : std::runtime_error("at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses a whole string as one structure.  Cyclic literals raise
/// CyclicStructureError; syntax errors raise NotationError.
FeatureStructure parse_feature_structure(std::string_view text);

std::string to_string(const FeatureStructure& fs);

/// `<a b c>`
std::string format_path(const Path& path);

bool is_symbol_char(char c);

}  // namespace anyparse
