#pragma once

#include <cstddef>
#include <vector>

#include "hlm/cells.hpp"
#include "hlm/corpus.hpp"
#include "hlm/model.hpp"

namespace hlm {

// Per-node encodings of a (sub)tree: the subtree representation
// (cell^tree, h^tree) and the descendant embedding (cell_des, h_des)
// consumed by next-sibling transitions.
struct EncodingTable {
  std::vector<StateV> subtree;
  std::vector<StateV> descend;
};

// BiLSTM consuming-step counters, exposed for tests.
struct EncodeStats {
  std::size_t forward_steps = 0;
  std::size_t backward_steps = 0;
};

// Bottom-up (post-order) encoding of the subtree rooted at `node`, filling
// `table` for every node in it:
//   leaf:        subtree = (leaf_cell[token], leaf_h[token]);
//                descendants = trainable empty-descendants pair
//   one child c: subtree = enc_lstm(tau_node, subtree_c);
//                descendants = subtree_c
//   k >= 2:      forward LSTM seeded with subtree_s1 consumes h_s2..h_sk,
//                backward LSTM seeded with subtree_sk consumes h_s(k-1)..h_s1,
//                subtree = enc_2d(tau_node, f1, f2);
//                descendants = combiner(f1, f2)
StateV encode_subtree(Tape& tape, const Model& model, const EncodedAst& tree, NodeId node,
                      EncodingTable& table, EncodeStats* stats = nullptr);

// Encodes the whole tree (post-order from the root).
EncodingTable encode_tree_states(Tape& tape, const Model& model, const EncodedAst& tree,
                                 EncodeStats* stats = nullptr);

// Descendant embedding of `node`; requires the table filled for its subtree.
StateV descendants(const EncodingTable& table, NodeId node);

}  // namespace hlm
