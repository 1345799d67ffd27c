#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlm/error.hpp"

namespace hlm {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Node {
  NodeId id = kNoNode;
  std::string token;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
};

// One parent link per input node: token plus the index of an earlier entry,
// or nullopt for the root.
using ParentLink = std::pair<std::string, std::optional<std::size_t>>;

// Rooted ordered tree of token-labeled nodes; one tree per function.
//
// Node ids are dense pre-order ranks: id 0 is the root and the subtree of
// node n occupies the contiguous id range [n, n + subtree_size(n)).
// Immutable after construction.
class Ast {
 public:
  static Ast from_parent_links(const std::vector<ParentLink>& entries);

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const;
  const std::vector<Node>& nodes() const { return nodes_; }

  bool is_leaf(NodeId id) const { return node(id).children.empty(); }
  NodeId first_child(NodeId id) const;
  NodeId next_sibling(NodeId id) const;
  std::int32_t subtree_size(NodeId id) const;

  // True iff `descendant` lies strictly inside the subtree rooted at `id`.
  bool is_strict_ancestor(NodeId id, NodeId descendant) const;

  // Per-tree metadata carried through serialization (canonical JSON text of
  // the optional `meta` field; empty when absent).
  const std::string& meta_json() const { return meta_json_; }
  void set_meta_json(std::string meta) { meta_json_ = std::move(meta); }

 private:
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<std::int32_t> subtree_size_;
  std::string meta_json_;
};

// Returns a structurally identical tree with per-node tokens replaced
// (tokens[i] labels node i). Used by the identifier-renaming variant.
Ast with_tokens(const Ast& tree, const std::vector<std::string>& tokens);

enum class TransitionKind { Initial, FirstChild, NextSibling };

const char* to_string(TransitionKind kind);

// A first-child or next-sibling edge in the FCNS DAG; `Initial` is the
// start pseudo-transition into the root (source is kNoNode).
struct Transition {
  NodeId source = kNoNode;
  NodeId target = kNoNode;
  TransitionKind kind = TransitionKind::Initial;

  bool operator==(const Transition&) const = default;
};

// Ordered transition sequence from the root to a target node. Unique per
// target since every node has exactly one incoming FCNS edge.
struct DecodingPath {
  std::vector<Transition> transitions;
};

Ast build_ast(const std::vector<ParentLink>& entries);

std::vector<NodeId> preorder(const Ast& tree);
std::vector<NodeId> postorder(const Ast& tree);

// Walks the transfer rule: from a node, move to its first child iff the
// target is a strict descendant, otherwise to its next sibling.
DecodingPath decoding_path(const Ast& tree, NodeId target);

// All FCNS edges, listed in pre-order of their targets (so a single forward
// pass sees every source before its targets). Edge count == node count.
std::vector<Transition> fcns_edges(const Ast& tree);

// Pre-order token sequence, with no structural bracket tokens.
std::vector<std::string> flatten(const Ast& tree);

}  // namespace hlm
