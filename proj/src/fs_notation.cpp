#include "anyparse/fs_notation.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <vector>

namespace anyparse {

bool is_symbol_char(char c) {
  if (std::isspace(static_cast<unsigned char>(c))) return false;
  switch (c) {
    case '[': case ']': case ':': case ',': case '#':
    case '<': case '>': case '|': case '=': case '!':
      return false;
    default:
      return true;
  }
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  FeatureStructure parse_all() {
    NodeId root = value();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return builder_.build(root);
  }

 private:
  struct Tag {
    NodeId node;
    bool defined = false;
  };

  [[noreturn]] void fail(const std::string& msg) const { throw NotationError(pos_, msg); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!at(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string symbol() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_symbol_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a symbol");
    return std::string(text_.substr(start, pos_ - start));
  }

  bool body_follows() {
    skip_space();
    return pos_ < text_.size() && (text_[pos_] == '[' || is_symbol_char(text_[pos_]));
  }

  NodeId value() {
    if (!at('#')) {
      NodeId node = builder_.add_complex();
      body(node);
      return node;
    }
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected tag number after '#'");
    const int number = std::stoi(std::string(text_.substr(start, pos_ - start)));
    auto it = tags_.find(number);
    if (it == tags_.end()) it = tags_.emplace(number, Tag{builder_.add_complex()}).first;
    if (body_follows()) {
      if (it->second.defined) fail("tag #" + std::to_string(number) + " defined twice");
      it->second.defined = true;
      body(it->second.node);
    }
    return it->second.node;
  }

  // Fills the pre-allocated node; tags need the node before its body is read.
  void body(NodeId node) {
    if (!at('[')) {
      builder_.make_atom(node, symbol());
      return;
    }
    ++pos_;
    if (at(']')) {
      ++pos_;
      return;
    }
    for (;;) {
      std::string feature = symbol();
      expect(':');
      if (builder_.arc(node, feature)) fail("duplicate feature '" + feature + "'");
      NodeId target = value();
      builder_.set_arc(node, feature, target);
      if (at(',')) {
        ++pos_;
        continue;
      }
      expect(']');
      return;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  FsBuilder builder_;
  std::map<int, Tag> tags_;
};

class Writer {
 public:
  explicit Writer(const FeatureStructure& fs) : fs_(fs), indegree_(fs.node_count(), 0) {
    for (const Node& n : fs.nodes()) {
      for (const Arc& a : n.arcs) ++indegree_[a.target];
    }
    tag_.assign(fs.node_count(), 0);
  }

  std::string run() {
    write(fs_.root());
    return std::move(out_);
  }

 private:
  void write(NodeId id) {
    if (indegree_[id] > 1) {
      if (tag_[id] != 0) {
        out_ += '#' + std::to_string(tag_[id]);
        return;
      }
      tag_[id] = ++next_tag_;
      out_ += '#' + std::to_string(tag_[id]);
      if (fs_.is_atomic(id)) out_ += ' ';
    }
    const Node& n = fs_.node(id);
    if (n.atomic()) {
      out_ += *n.atom;
      return;
    }
    out_ += '[';
    bool first = true;
    for (const Arc& a : n.arcs) {
      if (!first) out_ += ", ";
      first = false;
      out_ += a.feature;
      out_ += ": ";
      write(a.target);
    }
    out_ += ']';
  }

  const FeatureStructure& fs_;
  std::vector<int> indegree_;
  std::vector<int> tag_;
  int next_tag_ = 0;
  std::string out_;
};

}  // namespace

FeatureStructure parse_feature_structure(std::string_view text) {
  return Reader(text).parse_all();
}

std::string to_string(const FeatureStructure& fs) { return Writer(fs).run(); }

std::string format_path(const Path& path) {
  std::string out = "<";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ' ';
    out += path[i];
  }
  out += '>';
  return out;
}

}  // namespace anyparse
