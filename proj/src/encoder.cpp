#include "hlm/encoder.hpp"

namespace hlm {

namespace {

std::vector<NodeId> subtree_postorder(const Ast& ast, NodeId root) {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(ast.subtree_size(root)));
  std::vector<std::pair<NodeId, std::size_t>> stack = {{root, 0}};
  while (!stack.empty()) {
    auto& [cur, next] = stack.back();
    const auto& kids = ast.node(cur).children;
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

// Post-order over the subtree of `root`, so children are always encoded
// before their parent.
void encode_range(Tape& tape, const Model& model, const EncodedAst& tree, NodeId root,
                  EncodingTable& table, EncodeStats* stats) {
  const Ast& ast = tree.tree;
  StateV empty_des{tape.param(*model.empty_des_cell), tape.param(*model.empty_des_h)};

  for (NodeId id : subtree_postorder(ast, root)) {
    const Node& node = ast.node(id);
    const int token = tree.ids[static_cast<std::size_t>(id)];
    Value tau = tape.embedding_lookup(*model.tok_embed, token);

    if (node.children.empty()) {
      table.subtree[static_cast<std::size_t>(id)] = {
          tape.embedding_lookup(*model.leaf_cell, token),
          tape.embedding_lookup(*model.leaf_h, token)};
      table.descend[static_cast<std::size_t>(id)] = empty_des;
      continue;
    }
    if (node.children.size() == 1) {
      const StateV& child = table.subtree[static_cast<std::size_t>(node.children[0])];
      table.subtree[static_cast<std::size_t>(id)] = lstm_step(tape, model.enc_lstm, tau, child);
      table.descend[static_cast<std::size_t>(id)] = child;
      continue;
    }

    const auto& kids = node.children;
    StateV fw = table.subtree[static_cast<std::size_t>(kids.front())];
    for (std::size_t c = 1; c < kids.size(); ++c) {
      fw = lstm_step(tape, model.enc_fw, table.subtree[static_cast<std::size_t>(kids[c])].h, fw);
      if (stats) ++stats->forward_steps;
    }
    StateV bw = table.subtree[static_cast<std::size_t>(kids.back())];
    for (std::size_t c = kids.size() - 1; c-- > 0;) {
      bw = lstm_step(tape, model.enc_bw, table.subtree[static_cast<std::size_t>(kids[c])].h, bw);
      if (stats) ++stats->backward_steps;
    }
    table.subtree[static_cast<std::size_t>(id)] = twod_lstm_step(tape, model.enc_2d, tau, fw, bw);
    table.descend[static_cast<std::size_t>(id)] = combiner(tape, model.comb, fw, bw);
  }
}

}  // namespace

StateV encode_subtree(Tape& tape, const Model& model, const EncodedAst& tree, NodeId node,
                      EncodingTable& table, EncodeStats* stats) {
  if (model.kind != ModelKind::Hlm)
    fail(ErrorCode::InvalidArgument, "encode_subtree needs an HLM model");
  if (table.subtree.size() != tree.size()) {
    table.subtree.resize(tree.size());
    table.descend.resize(tree.size());
  }
  encode_range(tape, model, tree, node, table, stats);
  return table.subtree[static_cast<std::size_t>(node)];
}

EncodingTable encode_tree_states(Tape& tape, const Model& model, const EncodedAst& tree,
                                 EncodeStats* stats) {
  EncodingTable table;
  encode_subtree(tape, model, tree, tree.tree.root(), table, stats);
  return table;
}

StateV descendants(const EncodingTable& table, NodeId node) {
  const auto idx = static_cast<std::size_t>(node);
  if (idx >= table.descend.size() || !table.descend[idx].cell.valid())
    fail(ErrorCode::InvalidArgument, "descendants: encoding table not filled for node");
  return table.descend[idx];
}

}  // namespace hlm
