#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "hlm/ast.hpp"
#include "test_util.hpp"

using namespace hlm;
using test::example_tree;
using test::random_tree;
using test::tokens_of;

namespace {

// Brute-force recursive traversal oracles.
void preorder_oracle(const Ast& tree, NodeId n, std::vector<NodeId>& out) {
  out.push_back(n);
  for (NodeId c : tree.node(n).children) preorder_oracle(tree, c, out);
}

void postorder_oracle(const Ast& tree, NodeId n, std::vector<NodeId>& out) {
  for (NodeId c : tree.node(n).children) postorder_oracle(tree, c, out);
  out.push_back(n);
}

// Brute-force BFS over the FCNS edge set; with unique incoming edges the
// shortest path from the root is the only path.
std::vector<Transition> bfs_path(const Ast& tree, NodeId target) {
  const auto edges = fcns_edges(tree);
  std::map<NodeId, std::vector<Transition>> outgoing;
  Transition initial;
  for (const Transition& t : edges) {
    if (t.kind == TransitionKind::Initial) {
      initial = t;
    } else {
      outgoing[t.source].push_back(t);
    }
  }
  std::map<NodeId, Transition> incoming;
  std::queue<NodeId> frontier;
  incoming[initial.target] = initial;
  frontier.push(initial.target);
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop();
    for (const Transition& t : outgoing[cur]) {
      if (!incoming.count(t.target)) {
        incoming[t.target] = t;
        frontier.push(t.target);
      }
    }
  }
  std::vector<Transition> path;
  NodeId cur = target;
  while (true) {
    const Transition& t = incoming.at(cur);
    path.push_back(t);
    if (t.kind == TransitionKind::Initial) break;
    cur = t.source;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

TEST_CASE("build_ast single node") {
  Ast tree = build_ast({{"if", std::nullopt}});
  CHECK(tree.size() == 1);
  CHECK(tree.node(0).token == "if");
  CHECK(tree.node(0).children.empty());
}

TEST_CASE("build_ast small condition subtree") {
  Ast tree = build_ast({{"if", std::nullopt}, {">", 0}, {"a", 1}, {"b", 1}});
  CHECK(tree.size() == 4);
  CHECK(tree.node(0).token == "if");
  REQUIRE(tree.node(0).children.size() == 1);
  const Node& gt = tree.node(tree.node(0).children[0]);
  CHECK(gt.token == ">");
  REQUIRE(gt.children.size() == 2);
  CHECK(tree.node(gt.children[0]).token == "a");
  CHECK(tree.node(gt.children[1]).token == "b");
}

TEST_CASE("build_ast error cases") {
  try {
    build_ast({{"a", std::nullopt}, {"b", std::nullopt}});
    FAIL("expected MultipleRoots");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MultipleRoots);
  }
  try {
    build_ast({{"a", std::nullopt}, {"b", 5}});
    FAIL("expected DanglingParent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingParent);
  }
  try {
    build_ast({{"a", std::nullopt}, {"b", 1}});
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
  }
  CHECK_THROWS_AS(build_ast({}), Error);
  CHECK_THROWS_AS(build_ast({{"", std::nullopt}}), Error);
}

TEST_CASE("node ids are dense pre-order ranks regardless of insertion order") {
  // Siblings interleaved with a grandchild: insertion order != pre-order.
  Ast tree = build_ast({{"r", std::nullopt}, {"a", 0}, {"b", 0}, {"c", 1}});
  CHECK(tokens_of(tree, preorder(tree)) == std::vector<std::string>{"r", "a", "c", "b"});
  for (NodeId id : preorder(tree)) CHECK(tree.node(id).id == id);
  auto pre = preorder(tree);
  for (std::size_t i = 0; i < pre.size(); ++i) CHECK(pre[i] == static_cast<NodeId>(i));
}

TEST_CASE("preorder") {
  Ast single = build_ast({{"x", std::nullopt}});
  CHECK(preorder(single) == std::vector<NodeId>{0});

  CHECK(tokens_of(example_tree(), preorder(example_tree())) ==
        std::vector<std::string>{"if", ">", "a", "b", "=", "a", "+", "b", "5"});

  Ast chain = test::chain_tree(3);
  CHECK(preorder(chain) == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("postorder") {
  Ast single = build_ast({{"x", std::nullopt}});
  CHECK(postorder(single) == std::vector<NodeId>{0});

  // Hand traversal of the example tree, cross-checked by the recursive oracle.
  Ast tree = example_tree();
  CHECK(tokens_of(tree, postorder(tree)) ==
        std::vector<std::string>{"a", "b", ">", "a", "b", "5", "+", "=", "if"});
  std::vector<NodeId> oracle;
  postorder_oracle(tree, tree.root(), oracle);
  CHECK(postorder(tree) == oracle);

  Ast two = build_ast({{"r", std::nullopt}, {"l1", 0}, {"l2", 0}});
  CHECK(tokens_of(two, postorder(two)) == std::vector<std::string>{"l1", "l2", "r"});
}

TEST_CASE("traversals match recursive oracles on random trees") {
  Rng rng(11);
  for (int round = 0; round < 30; ++round) {
    Ast tree = random_tree(rng, 1 + rng.below(60));
    std::vector<NodeId> pre, post;
    preorder_oracle(tree, tree.root(), pre);
    postorder_oracle(tree, tree.root(), post);
    CHECK(preorder(tree) == pre);
    CHECK(postorder(tree) == post);
    CHECK(pre.size() == tree.size());
    CHECK(post.size() == tree.size());
    std::set<NodeId> ids(pre.begin(), pre.end());
    CHECK(ids.size() == tree.size());
  }
}

TEST_CASE("decoding_path to the root is just Initial") {
  Ast tree = example_tree();
  auto path = decoding_path(tree, tree.root());
  REQUIRE(path.transitions.size() == 1);
  CHECK(path.transitions[0].kind == TransitionKind::Initial);
  CHECK(path.transitions[0].target == tree.root());
}

TEST_CASE("decoding_path to a second child goes through the first") {
  Ast tree = build_ast({{"R", std::nullopt}, {"A", 0}, {"B", 0}});
  auto path = decoding_path(tree, 2).transitions;
  REQUIRE(path.size() == 3);
  CHECK(path[0] == Transition{kNoNode, 0, TransitionKind::Initial});
  CHECK(path[1] == Transition{0, 1, TransitionKind::FirstChild});
  CHECK(path[2] == Transition{1, 2, TransitionKind::NextSibling});
}

TEST_CASE("decoding_path to '+' equals the BFS oracle over fcns_edges") {
  Ast tree = example_tree();
  const NodeId plus = 6;  // pre-order rank of "+"
  REQUIRE(tree.node(plus).token == "+");
  auto path = decoding_path(tree, plus).transitions;
  CHECK(path == bfs_path(tree, plus));
  // Transfer rule: Initial, if->(>), (>)->(=), (=)->a, a->(+).
  CHECK(path.size() == 5);
}

TEST_CASE("decoding_path errors on unknown nodes") {
  Ast tree = example_tree();
  CHECK_THROWS_AS(decoding_path(tree, 99), Error);
  try {
    decoding_path(tree, 99);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NodeNotFound);
  }
}

TEST_CASE("fcns_edges basic shapes") {
  Ast single = build_ast({{"x", std::nullopt}});
  auto edges = fcns_edges(single);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].kind == TransitionKind::Initial);

  Ast star = build_ast({{"r", std::nullopt}, {"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}});
  edges = fcns_edges(star);
  CHECK(edges.size() == star.size());
  int initial = 0, first = 0, sibling = 0;
  for (const auto& e : edges) {
    if (e.kind == TransitionKind::Initial) ++initial;
    if (e.kind == TransitionKind::FirstChild) ++first;
    if (e.kind == TransitionKind::NextSibling) ++sibling;
  }
  CHECK(initial == 1);
  CHECK(first == 1);
  CHECK(sibling == 3);
}

TEST_CASE("decoding paths and the FCNS edge set agree on random trees") {
  Rng rng(23);
  for (int round = 0; round < 20; ++round) {
    Ast tree = random_tree(rng, 1 + rng.below(50));
    const auto edges = fcns_edges(tree);
    CHECK(edges.size() == tree.size());

    // One incoming edge per node.
    std::set<NodeId> targets;
    for (const auto& e : edges) targets.insert(e.target);
    CHECK(targets.size() == tree.size());

    const std::set<std::tuple<NodeId, NodeId, int>> edge_set = [&] {
      std::set<std::tuple<NodeId, NodeId, int>> s;
      for (const auto& e : edges) s.insert({e.source, e.target, static_cast<int>(e.kind)});
      return s;
    }();

    std::set<std::tuple<NodeId, NodeId, int>> visited;
    for (NodeId target = 0; target < static_cast<NodeId>(tree.size()); ++target) {
      const auto path = decoding_path(tree, target).transitions;
      CHECK(path.front().kind == TransitionKind::Initial);
      CHECK(path.back().target == target);
      for (std::size_t i = 0; i + 1 < path.size(); ++i)
        CHECK(path[i].target == path[i + 1].source);
      for (const auto& t : path) {
        CHECK(edge_set.count({t.source, t.target, static_cast<int>(t.kind)}) == 1);
        visited.insert({t.source, t.target, static_cast<int>(t.kind)});
      }
      // FirstChild out of s happens iff the target is a strict descendant of s.
      for (const auto& t : path) {
        if (t.kind == TransitionKind::FirstChild)
          CHECK(tree.is_strict_ancestor(t.source, target));
        if (t.kind == TransitionKind::NextSibling)
          CHECK_FALSE(tree.is_strict_ancestor(t.source, target));
      }
      // Unique path: replaying must reproduce itself.
      CHECK(decoding_path(tree, target).transitions == path);
    }
    // Union of all decoding paths covers the edge set exactly.
    CHECK(visited == edge_set);
  }
}

TEST_CASE("flatten is the pre-order token sequence") {
  CHECK(flatten(example_tree()) ==
        std::vector<std::string>{"if", ">", "a", "b", "=", "a", "+", "b", "5"});
  Ast single = build_ast({{"z", std::nullopt}});
  CHECK(flatten(single) == std::vector<std::string>{"z"});
  CHECK(flatten(test::chain_tree(3)).size() == 3);
}

TEST_CASE("with_tokens relabels without changing structure") {
  Ast tree = build_ast({{"r", std::nullopt}, {"a", 0}, {"b", 0}});
  Ast renamed = with_tokens(tree, {"r2", "a2", "b2"});
  CHECK(renamed.size() == tree.size());
  CHECK(renamed.node(1).token == "a2");
  CHECK(renamed.node(1).parent == 0);
  CHECK_THROWS_AS(with_tokens(tree, {"only_one"}), Error);
}
