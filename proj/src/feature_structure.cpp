#include "anyparse/feature_structure.hpp"

#include <algorithm>
#include <deque>

namespace anyparse {

namespace {

const std::shared_ptr<const std::vector<Node>>& empty_nodes() {
  static const auto nodes = std::make_shared<const std::vector<Node>>(1);
  return nodes;
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureStructure

FeatureStructure::FeatureStructure() : nodes_(empty_nodes()) {}

FeatureStructure FeatureStructure::atom(std::string symbol) {
  std::vector<Node> nodes(1);
  nodes[0].atom = std::move(symbol);
  return FeatureStructure(std::make_shared<const std::vector<Node>>(std::move(nodes)));
}

bool FeatureStructure::is_empty() const {
  const Node& r = node(root());
  return !r.atomic() && r.arcs.empty();
}

std::optional<NodeId> FeatureStructure::arc(NodeId id, std::string_view feature) const {
  const auto& arcs = node(id).arcs;
  auto it = std::lower_bound(arcs.begin(), arcs.end(), feature,
                             [](const Arc& a, std::string_view f) { return a.feature < f; });
  if (it == arcs.end() || it->feature != feature) return std::nullopt;
  return it->target;
}

FeatureStructure FeatureStructure::substructure(NodeId id) const {
  if (id == root()) return *this;
  FsBuilder b;
  NodeId base = b.import(*this);
  return b.build(base + id);
}

FeatureStructure FeatureStructure::embed(const Path& path) const {
  if (path.empty()) return *this;
  FsBuilder b;
  NodeId top = b.add_complex();
  Path prefix(path.begin(), path.end() - 1);
  NodeId parent = b.ensure_path(top, prefix);
  NodeId inner = b.import(*this);
  b.set_arc(parent, path.back(), inner);
  return b.build(top);
}

// ---------------------------------------------------------------------------
// FsBuilder

NodeId FsBuilder::add_complex() {
  nodes_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId FsBuilder::add_atom(std::string symbol) {
  nodes_.push_back(MutableNode{std::move(symbol), {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void FsBuilder::make_atom(NodeId id, std::string symbol) {
  MutableNode& n = nodes_.at(id);
  if (!n.arcs.empty()) throw std::invalid_argument("atom '" + symbol + "' on a node with arcs");
  n.atom = std::move(symbol);
}

void FsBuilder::set_arc(NodeId from, const Feature& feature, NodeId to) {
  MutableNode& n = nodes_.at(from);
  if (n.atom) throw std::invalid_argument("arc '" + feature + "' out of atomic node");
  n.arcs[feature] = to;
}

NodeId FsBuilder::ensure_path(NodeId from, const Path& path) {
  NodeId cur = from;
  for (const auto& f : path) {
    if (auto next = arc(cur, f)) {
      cur = *next;
      continue;
    }
    NodeId fresh = add_complex();
    set_arc(cur, f, fresh);
    cur = fresh;
  }
  return cur;
}

NodeId FsBuilder::import(const FeatureStructure& fs) {
  const auto base = static_cast<NodeId>(nodes_.size());
  for (const Node& n : fs.nodes()) {
    MutableNode m;
    m.atom = n.atom;
    for (const Arc& a : n.arcs) m.arcs.emplace(a.feature, a.target + base);
    nodes_.push_back(std::move(m));
  }
  return base + fs.root();
}

std::optional<NodeId> FsBuilder::arc(NodeId from, std::string_view feature) const {
  const auto& arcs = nodes_.at(from).arcs;
  auto it = arcs.find(std::string(feature));
  if (it == arcs.end()) return std::nullopt;
  return it->second;
}

FeatureStructure FsBuilder::build(NodeId root) const {
  constexpr NodeId kUnvisited = ~NodeId{0};
  std::vector<NodeId> renumber(nodes_.size(), kUnvisited);
  std::vector<char> on_stack(nodes_.size(), 0);
  std::vector<Node> out;

  // Iterative DFS: pre-order numbering, post-order arc wiring.
  struct Frame {
    NodeId old_id;
    std::map<Feature, NodeId>::const_iterator next;
  };
  std::vector<Frame> stack;
  auto enter = [&](NodeId old_id) {
    renumber[old_id] = static_cast<NodeId>(out.size());
    Node n;
    n.atom = nodes_[old_id].atom;
    out.push_back(std::move(n));
    on_stack[old_id] = 1;
    stack.push_back({old_id, nodes_[old_id].arcs.begin()});
  };
  enter(root);
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& arcs = nodes_[top.old_id].arcs;
    if (top.next == arcs.end()) {
      on_stack[top.old_id] = 0;
      stack.pop_back();
      continue;
    }
    const auto& [feature, target] = *top.next;
    ++top.next;
    const NodeId parent_new = renumber[top.old_id];
    if (on_stack[target]) {
      throw CyclicStructureError("cycle through feature '" + feature + "'");
    }
    if (renumber[target] == kUnvisited) enter(target);
    out[parent_new].arcs.push_back({feature, renumber[target]});
  }
  return FeatureStructure(std::make_shared<const std::vector<Node>>(std::move(out)));
}

// ---------------------------------------------------------------------------
// Disjunction

Disjunction::Disjunction(std::vector<FeatureStructure> alternatives, std::string origin)
    : alternatives_(std::move(alternatives)), origin_(std::move(origin)) {
  if (alternatives_.empty()) {
    throw std::invalid_argument("disjunction without alternatives (" + origin_ + ")");
  }
}

// ---------------------------------------------------------------------------
// Unification
//
// Both inputs are copied into one builder and merged with union-find.  Pairs
// of nodes to identify are processed breadth-first with arcs in feature order,
// so the first clash reported is the leftmost among the shortest paths seen.

class Unifier {
 public:
  Outcome<FeatureStructure> run(const FeatureStructure& a, const FeatureStructure& b) {
    const NodeId ra = g_.import(a);
    const NodeId rb = g_.import(b);
    parent_.resize(g_.nodes_.size());
    for (NodeId i = 0; i < parent_.size(); ++i) parent_[i] = i;

    struct Pending {
      NodeId x, y;
      Path path;
    };
    std::deque<Pending> queue;
    queue.push_back({ra, rb, {}});
    while (!queue.empty()) {
      Pending p = std::move(queue.front());
      queue.pop_front();
      NodeId x = find(p.x);
      NodeId y = find(p.y);
      if (x == y) continue;
      auto& nx = g_.nodes_[x];
      auto& ny = g_.nodes_[y];
      if (nx.atom && ny.atom) {
        if (*nx.atom != *ny.atom) {
          return UnifyFailure{std::move(p.path), "atom clash: " + *nx.atom + " vs " + *ny.atom};
        }
        parent_[y] = x;
      } else if (nx.atom || ny.atom) {
        const auto& complex = nx.atom ? ny : nx;
        if (!complex.arcs.empty()) {
          return UnifyFailure{std::move(p.path), "atom vs complex"};
        }
        if (nx.atom) parent_[y] = x;
        else parent_[x] = y;
      } else {
        parent_[y] = x;
        auto moved = std::move(ny.arcs);
        ny.arcs.clear();
        for (auto& [feature, target] : moved) {
          auto it = nx.arcs.find(feature);
          if (it == nx.arcs.end()) {
            nx.arcs.emplace(feature, target);
          } else {
            Path next = p.path;
            next.push_back(feature);
            queue.push_back({it->second, target, std::move(next)});
          }
        }
      }
    }
    for (auto& n : g_.nodes_) {
      for (auto& [feature, target] : n.arcs) target = find(target);
    }
    return g_.build(find(ra));
  }

 private:
  NodeId find(NodeId x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  FsBuilder g_;
  std::vector<NodeId> parent_;
};

Outcome<FeatureStructure> unify(const FeatureStructure& a, const FeatureStructure& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return Unifier().run(a, b);
}

Outcome<FeatureStructure> unify_one_disjunct(const FeatureStructure& a,
                                             const Disjunction& d,
                                             std::size_t index) {
  if (index >= d.size()) {
    throw std::out_of_range("disjunct " + std::to_string(index) + " of " +
                            std::to_string(d.size()) + " (" + d.origin() + ")");
  }
  return unify(a, d.alternatives()[index]);
}

// ---------------------------------------------------------------------------

bool subsumes(const FeatureStructure& a, const FeatureStructure& b) {
  constexpr NodeId kUnmapped = ~NodeId{0};
  std::vector<NodeId> image(a.node_count(), kUnmapped);
  std::vector<std::pair<NodeId, NodeId>> todo{{a.root(), b.root()}};
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    if (image[x] != kUnmapped) {
      if (image[x] != y) return false;  // a equates paths that b keeps apart
      continue;
    }
    image[x] = y;
    const Node& nx = a.node(x);
    const Node& ny = b.node(y);
    if (nx.atomic()) {
      if (!ny.atomic() || *ny.atom != *nx.atom) return false;
      continue;
    }
    if (nx.arcs.empty()) continue;
    if (ny.atomic()) return false;
    for (const Arc& arc : nx.arcs) {
      auto target = b.arc(y, arc.feature);
      if (!target) return false;
      todo.emplace_back(arc.target, *target);
    }
  }
  return true;
}

std::optional<NodeId> follow(const FeatureStructure& fs, const Path& path) {
  NodeId cur = fs.root();
  for (const auto& f : path) {
    auto next = fs.arc(cur, f);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

FeatureStructure copy(const FeatureStructure& fs) {
  FsBuilder b;
  return b.build(b.import(fs));
}

bool isomorphic(const FeatureStructure& a, const FeatureStructure& b) { return a == b; }

}  // namespace anyparse
