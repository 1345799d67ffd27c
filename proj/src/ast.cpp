#include "hlm/ast.hpp"

#include <algorithm>

namespace hlm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::MultipleRoots: return "multiple_roots";
    case ErrorCode::CycleDetected: return "cycle_detected";
    case ErrorCode::DanglingParent: return "dangling_parent";
    case ErrorCode::NodeNotFound: return "node_not_found";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::InvalidTree: return "invalid_tree";
    case ErrorCode::EmptyFile: return "empty_file";
    case ErrorCode::BadRatios: return "bad_ratios";
    case ErrorCode::EmptyCorpus: return "empty_corpus";
    case ErrorCode::EmptySplit: return "empty_split";
    case ErrorCode::GrammarUnsatisfiable: return "grammar_unsatisfiable";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::InvalidPrefix: return "invalid_prefix";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

const char* to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::Initial: return "initial";
    case TransitionKind::FirstChild: return "first_child";
    case TransitionKind::NextSibling: return "next_sibling";
  }
  return "unknown";
}

void Ast::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    fail(ErrorCode::NodeNotFound, "node id " + std::to_string(id) + " out of range");
}

const Node& Ast::node(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

NodeId Ast::first_child(NodeId id) const {
  const Node& n = node(id);
  return n.children.empty() ? kNoNode : n.children.front();
}

NodeId Ast::next_sibling(NodeId id) const {
  const Node& n = node(id);
  if (n.parent == kNoNode) return kNoNode;
  const auto& siblings = node(n.parent).children;
  auto it = std::find(siblings.begin(), siblings.end(), id);
  return (it + 1 == siblings.end()) ? kNoNode : *(it + 1);
}

std::int32_t Ast::subtree_size(NodeId id) const {
  check_id(id);
  return subtree_size_[static_cast<std::size_t>(id)];
}

bool Ast::is_strict_ancestor(NodeId id, NodeId descendant) const {
  check_id(id);
  check_id(descendant);
  // Ids are pre-order ranks, so a subtree is a contiguous id range.
  return descendant > id && descendant < id + subtree_size_[static_cast<std::size_t>(id)];
}

Ast Ast::from_parent_links(const std::vector<ParentLink>& entries) {
  const std::size_t n = entries.size();
  if (n == 0) fail(ErrorCode::InvalidTree, "a tree needs at least one node");

  std::size_t root_count = 0;
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [token, parent] = entries[i];
    if (token.empty())
      fail(ErrorCode::InvalidTree, "node " + std::to_string(i) + " has an empty token");
    if (!parent) {
      ++root_count;
      if (root_count > 1)
        fail(ErrorCode::MultipleRoots, "more than one node without a parent");
      continue;
    }
    if (*parent >= n)
      fail(ErrorCode::DanglingParent,
           "node " + std::to_string(i) + " points at nonexistent parent " + std::to_string(*parent));
    if (*parent >= i)
      fail(ErrorCode::CycleDetected,
           "node " + std::to_string(i) + " points at parent " + std::to_string(*parent) +
               "; parent links must refer to earlier entries");
    children[*parent].push_back(i);
  }
  if (root_count == 0) fail(ErrorCode::MultipleRoots, "no root node");

  std::size_t root = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!entries[i].second) { root = i; break; }

  // Renumber to pre-order ranks, keeping sibling order.
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> stack = {root};
  while (!stack.empty()) {
    std::size_t cur = stack.back();
    stack.pop_back();
    order.push_back(cur);
    const auto& kids = children[cur];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  if (order.size() != n)
    fail(ErrorCode::InvalidTree, "parent links do not form a single tree");

  std::vector<NodeId> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<NodeId>(i);

  Ast tree;
  tree.nodes_.resize(n);
  tree.subtree_size_.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t old = order[i];
    Node& node = tree.nodes_[i];
    node.id = static_cast<NodeId>(i);
    node.token = entries[old].first;
    node.parent = entries[old].second ? rank[*entries[old].second] : kNoNode;
    node.children.reserve(children[old].size());
    for (std::size_t child : children[old]) node.children.push_back(rank[child]);
  }
  for (std::size_t i = n; i-- > 1;) {
    const NodeId parent = tree.nodes_[i].parent;
    tree.subtree_size_[static_cast<std::size_t>(parent)] +=
        tree.subtree_size_[i];
  }
  return tree;
}

Ast build_ast(const std::vector<ParentLink>& entries) {
  return Ast::from_parent_links(entries);
}

Ast with_tokens(const Ast& tree, const std::vector<std::string>& tokens) {
  if (tokens.size() != tree.size())
    fail(ErrorCode::InvalidArgument, "token list size does not match node count");
  std::vector<ParentLink> entries;
  entries.reserve(tree.size());
  for (const Node& node : tree.nodes()) {
    entries.emplace_back(tokens[static_cast<std::size_t>(node.id)],
                         node.parent == kNoNode
                             ? std::nullopt
                             : std::optional<std::size_t>(static_cast<std::size_t>(node.parent)));
  }
  Ast out = Ast::from_parent_links(entries);
  out.set_meta_json(tree.meta_json());
  return out;
}

std::vector<NodeId> preorder(const Ast& tree) {
  std::vector<NodeId> out;
  out.reserve(tree.size());
  std::vector<NodeId> stack = {tree.root()};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = tree.node(cur).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> postorder(const Ast& tree) {
  std::vector<NodeId> out;
  out.reserve(tree.size());
  // (node, next child index) stack; a node is emitted once all its children are.
  std::vector<std::pair<NodeId, std::size_t>> stack = {{tree.root(), 0}};
  while (!stack.empty()) {
    auto& [cur, next] = stack.back();
    const auto& kids = tree.node(cur).children;
    if (next < kids.size()) {
      NodeId child = kids[next++];
      stack.emplace_back(child, 0);
    } else {
      out.push_back(cur);
      stack.pop_back();
    }
  }
  return out;
}

DecodingPath decoding_path(const Ast& tree, NodeId target) {
  if (target < 0 || static_cast<std::size_t>(target) >= tree.size())
    fail(ErrorCode::NodeNotFound, "decoding_path target " + std::to_string(target) + " not in tree");
  DecodingPath path;
  path.transitions.push_back({kNoNode, tree.root(), TransitionKind::Initial});
  NodeId cur = tree.root();
  while (cur != target) {
    if (tree.is_strict_ancestor(cur, target)) {
      NodeId child = tree.first_child(cur);
      path.transitions.push_back({cur, child, TransitionKind::FirstChild});
      cur = child;
    } else {
      NodeId sibling = tree.next_sibling(cur);
      path.transitions.push_back({cur, sibling, TransitionKind::NextSibling});
      cur = sibling;
    }
  }
  return path;
}

std::vector<Transition> fcns_edges(const Ast& tree) {
  std::vector<Transition> edges;
  edges.reserve(tree.size());
  for (NodeId id : preorder(tree)) {
    if (id == tree.root()) {
      edges.push_back({kNoNode, id, TransitionKind::Initial});
      continue;
    }
    const Node& node = tree.node(id);
    const auto& siblings = tree.node(node.parent).children;
    if (siblings.front() == id) {
      edges.push_back({node.parent, id, TransitionKind::FirstChild});
    } else {
      auto it = std::find(siblings.begin(), siblings.end(), id);
      edges.push_back({*(it - 1), id, TransitionKind::NextSibling});
    }
  }
  return edges;
}

std::vector<std::string> flatten(const Ast& tree) {
  std::vector<std::string> out;
  out.reserve(tree.size());
  for (NodeId id : preorder(tree)) out.push_back(tree.node(id).token);
  return out;
}

}  // namespace hlm
