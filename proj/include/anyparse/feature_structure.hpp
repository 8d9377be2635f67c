#pragma once

// Untyped feature structures: rooted acyclic graphs of feature arcs whose
// coreferences are expressed by node identity.
//
// A FeatureStructure is an immutable value.  Every structure is stored with a
// canonical node numbering (depth-first pre-order from the root, arcs visited
// in feature-name order), so two structures are isomorphic exactly when their
// node tables compare equal.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace anyparse {

using NodeId = std::uint32_t;
using Feature = std::string;
using Path = std::vector<Feature>;

struct Arc {
  Feature feature;
  NodeId target;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// One node of a structure.  An atomic node carries a symbol and no arcs; a
/// complex node with no arcs is the unconstrained node and unifies with
/// anything.
struct Node {
  std::optional<std::string> atom;
  std::vector<Arc> arcs;  // sorted by feature, labels unique

  bool atomic() const { return atom.has_value(); }

  friend bool operator==(const Node&, const Node&) = default;
};

/// Thrown when a structure would contain a cycle.  Cyclic structures are
/// outside the supported domain, so this is a program error rather than a
/// unification failure.
class CyclicStructureError : public std::logic_error {
 public:
  explicit CyclicStructureError(const std::string& what)
      : std::logic_error(what) {}
};

class FeatureStructure {
 public:
  /// The empty structure `[]`.
  FeatureStructure();

  static FeatureStructure atom(std::string symbol);

  NodeId root() const { return 0; }
  std::size_t node_count() const { return nodes_->size(); }
  const Node& node(NodeId id) const { return nodes_->at(id); }
  const std::vector<Node>& nodes() const { return *nodes_; }

  bool is_atomic(NodeId id) const { return node(id).atomic(); }
  bool is_empty() const;

  /// Target of `feature` out of `id`, if present.
  std::optional<NodeId> arc(NodeId id, std::string_view feature) const;

  /// The sub-graph rooted at `id` as a structure of its own.
  FeatureStructure substructure(NodeId id) const;

  /// `[p1: [p2: ... this]]`.  An empty path returns *this.
  FeatureStructure embed(const Path& path) const;

  friend bool operator==(const FeatureStructure& a, const FeatureStructure& b) {
    return a.nodes_ == b.nodes_ || *a.nodes_ == *b.nodes_;
  }

 private:
  friend class FsBuilder;
  explicit FeatureStructure(std::shared_ptr<const std::vector<Node>> nodes)
      : nodes_(std::move(nodes)) {}

  std::shared_ptr<const std::vector<Node>> nodes_;
};

/// Mutable staging area for building structures.  `build` canonicalizes the
/// part reachable from the chosen root and rejects cycles.
class FsBuilder {
 public:
  NodeId add_complex();
  NodeId add_atom(std::string symbol);

  /// Turns an arc-less complex node into an atom.
  void make_atom(NodeId id, std::string symbol);

  /// Sets (or replaces) the arc `feature` out of complex node `from`.
  void set_arc(NodeId from, const Feature& feature, NodeId to);

  /// Walks `path` from `from`, creating empty complex nodes for missing arcs.
  /// Throws std::invalid_argument when the walk runs into an atomic node.
  NodeId ensure_path(NodeId from, const Path& path);

  /// Copies all nodes of `fs` in; returns the id of its root.
  NodeId import(const FeatureStructure& fs);

  std::optional<NodeId> arc(NodeId from, std::string_view feature) const;
  bool is_atomic(NodeId id) const { return nodes_.at(id).atom.has_value(); }
  std::size_t size() const { return nodes_.size(); }

  FeatureStructure build(NodeId root) const;

 private:
  friend class Unifier;
  struct MutableNode {
    std::optional<std::string> atom;
    std::map<Feature, NodeId> arcs;
  };
  std::vector<MutableNode> nodes_;
};

struct UnifyFailure {
  Path path;           // where the clash was detected, relative to the root
  std::string reason;  // e.g. "atom clash: sg vs pl"

  friend bool operator==(const UnifyFailure&, const UnifyFailure&) = default;
};

/// Either a value or the unification failure that prevented it.
template <class T>
class Outcome {
 public:
  Outcome(T value) : v_(std::move(value)) {}                // NOLINT
  Outcome(UnifyFailure failure) : v_(std::move(failure)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(v_); }
  T& value() & { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }
  const T* operator->() const { return &std::get<T>(v_); }
  const T& operator*() const { return std::get<T>(v_); }

  const UnifyFailure& failure() const { return std::get<UnifyFailure>(v_); }

 private:
  std::variant<T, UnifyFailure> v_;
};

/// Ordered, non-empty set of alternative structures offered by one grammar
/// constraint.  Each alternative is tried as its own unit of work.
class Disjunction {
 public:
  Disjunction(std::vector<FeatureStructure> alternatives, std::string origin);

  const std::vector<FeatureStructure>& alternatives() const { return alternatives_; }
  std::size_t size() const { return alternatives_.size(); }
  const std::string& origin() const { return origin_; }

 private:
  std::vector<FeatureStructure> alternatives_;
  std::string origin_;
};

/// Most general structure subsumed by both inputs.  Inputs are untouched.
/// Throws CyclicStructureError if the combined constraints force a cycle.
Outcome<FeatureStructure> unify(const FeatureStructure& a, const FeatureStructure& b);

/// unify(a, d.alternatives()[index]); throws std::out_of_range on a bad index.
Outcome<FeatureStructure> unify_one_disjunct(const FeatureStructure& a,
                                             const Disjunction& d,
                                             std::size_t index);

/// True iff every atom-at-path and every path equality of `a` holds in `b`.
bool subsumes(const FeatureStructure& a, const FeatureStructure& b);

std::optional<NodeId> follow(const FeatureStructure& fs, const Path& path);

FeatureStructure copy(const FeatureStructure& fs);

bool isomorphic(const FeatureStructure& a, const FeatureStructure& b);

}  // namespace anyparse
