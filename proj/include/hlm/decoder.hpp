#pragma once

#include <string>
#include <vector>

#include "hlm/encoder.hpp"

namespace hlm {

// Incoming transition state per node, indexed by the transition's target.
// The root's entry is the fixed default (zero) state.
struct TransitionStates {
  std::vector<StateV> incoming;
};

// Single pass over the FCNS edges in pre-order of targets:
//   Initial          -> default zero state
//   FirstChild from s -> lstm_step(tau_s, state_s)
//   NextSibling from s -> twod_lstm_step(tau_s, descendants(s), state_s)
// `table` must cover every next-sibling source's subtree; encode the whole
// tree once and pass it in.
TransitionStates hlm_states(Tape& tape, const Model& model, const EncodedAst& tree,
                            const EncodingTable& table);

// softmax(V h) over the vocabulary.
std::vector<double> predict(const Model& model, const StateV& state);

// Per-tree training loss: sum over all nodes (root included, predicted from
// the default state) of -log probs[oracle].
Value tree_loss(Tape& tape, const Model& model, const EncodedAst& tree);

// Baseline next-token losses over the flattened (pre-order) sequence; the
// first token is predicted from the zero state.
Value sequence_loss(Tape& tape, const Model& model, const EncodedAst& tree);

// Loss of any model kind on one tree.
Value model_loss(Tape& tape, const Model& model, const EncodedAst& tree);

// One probability vector per node, in pre-order (equals flattened-sequence
// order for the baselines).
std::vector<std::vector<double>> node_predictions(const Model& model, const EncodedAst& tree);

struct Completion {
  int position = 0;  // pre-order index of the completed slot
  std::vector<std::pair<std::string, double>> candidates;
};

// Top-k completion at the last pre-order node of `prefix` (the insertion
// point; its own token is ignored, since predictions only see earlier
// nodes). Candidates sorted by descending probability, ties by ascending
// token id.
Completion complete(const Model& model, const Ast& prefix, int k);

// Reference (test oracle) path: recomputes the incoming state of one node
// by replaying its decoding path transition by transition.
StateV replay_decoding_path(Tape& tape, const Model& model, const EncodedAst& tree,
                            NodeId target, const EncodingTable& table);

}  // namespace hlm
