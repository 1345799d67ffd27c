#include "hlm/decoder.hpp"

#include <algorithm>
#include <numeric>

namespace hlm {

namespace {

StateV default_state(Tape& tape, int d) {
  return {tape.zeros({d, 1}), tape.zeros({d, 1})};
}

Value token_embedding(Tape& tape, const Model& model, const EncodedAst& tree, NodeId node) {
  return tape.embedding_lookup(*model.tok_embed,
                               tree.ids[static_cast<std::size_t>(node)]);
}

StateV step_transition(Tape& tape, const Model& model, const EncodedAst& tree,
                       const EncodingTable& table, const Transition& t,
                       const StateV& source_state) {
  Value tau = token_embedding(tape, model, tree, t.source);
  if (t.kind == TransitionKind::FirstChild)
    return lstm_step(tape, model.dec_lstm, tau, source_state);
  return twod_lstm_step(tape, model.dec_2d, tau, descendants(table, t.source), source_state);
}

}  // namespace

TransitionStates hlm_states(Tape& tape, const Model& model, const EncodedAst& tree,
                            const EncodingTable& table) {
  if (model.kind != ModelKind::Hlm)
    fail(ErrorCode::InvalidArgument, "hlm_states needs an HLM model");
  TransitionStates states;
  states.incoming.resize(tree.size());
  for (const Transition& t : fcns_edges(tree.tree)) {
    const auto target = static_cast<std::size_t>(t.target);
    if (t.kind == TransitionKind::Initial) {
      states.incoming[target] = default_state(tape, model.d);
    } else {
      states.incoming[target] = step_transition(
          tape, model, tree, table, t, states.incoming[static_cast<std::size_t>(t.source)]);
    }
  }
  return states;
}

StateV replay_decoding_path(Tape& tape, const Model& model, const EncodedAst& tree,
                            NodeId target, const EncodingTable& table) {
  StateV state;
  for (const Transition& t : decoding_path(tree.tree, target).transitions) {
    if (t.kind == TransitionKind::Initial) {
      state = default_state(tape, model.d);
    } else {
      state = step_transition(tape, model, tree, table, t, state);
    }
  }
  return state;
}

std::vector<double> predict(const Model& model, const StateV& state) {
  Tape tape;
  Value h = tape.constant(state.h.shape(), state.h.data());
  Value logits = tape.matmul(tape.param(*model.out_proj), h);
  return softmax(logits.data());
}

Value tree_loss(Tape& tape, const Model& model, const EncodedAst& tree) {
  EncodingTable table = encode_tree_states(tape, model, tree);
  TransitionStates states = hlm_states(tape, model, tree, table);
  Value projection = tape.param(*model.out_proj);
  Value total;
  for (NodeId id : preorder(tree.tree)) {
    Value logits = tape.matmul(projection, states.incoming[static_cast<std::size_t>(id)].h);
    Value loss = tape.softmax_cross_entropy(logits, tree.ids[static_cast<std::size_t>(id)]);
    total = total.valid() ? tape.add(total, loss) : loss;
  }
  return total;
}

namespace {

// States from which each sequence position is predicted; index i is the
// state after consuming tokens 0..i-1 (index 0 is the zero state).
std::vector<StateV> sequence_states(Tape& tape, const Model& model,
                                    const std::vector<int>& tokens) {
  std::vector<StateV> states;
  states.reserve(tokens.size());
  StateV state = default_state(tape, model.d);
  states.push_back(state);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    Value tau = tape.embedding_lookup(*model.tok_embed, tokens[i]);
    if (model.kind == ModelKind::Lstm) {
      state = lstm_step(tape, model.seq_lstm, tau, state);
    } else {
      Value joined = tape.concat_rows({tau, state.h});
      Value h = tape.tanh(tape.add(tape.matmul(tape.param(*model.rnn_W), joined),
                                   tape.param(*model.rnn_b)));
      state = {tape.zeros({model.d, 1}), h};
    }
    states.push_back(state);
  }
  return states;
}

}  // namespace

Value sequence_loss(Tape& tape, const Model& model, const EncodedAst& tree) {
  if (model.kind == ModelKind::Hlm)
    fail(ErrorCode::InvalidArgument, "sequence_loss is for the baseline models");
  const std::vector<int>& tokens = tree.ids;  // pre-order == flattened order
  std::vector<StateV> states = sequence_states(tape, model, tokens);
  Value projection = tape.param(*model.out_proj);
  Value total;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Value logits = tape.matmul(projection, states[i].h);
    Value loss = tape.softmax_cross_entropy(logits, tokens[i]);
    total = total.valid() ? tape.add(total, loss) : loss;
  }
  return total;
}

Value model_loss(Tape& tape, const Model& model, const EncodedAst& tree) {
  return model.kind == ModelKind::Hlm ? tree_loss(tape, model, tree)
                                      : sequence_loss(tape, model, tree);
}

std::vector<std::vector<double>> node_predictions(const Model& model, const EncodedAst& tree) {
  Tape tape;
  std::vector<StateV> states;
  if (model.kind == ModelKind::Hlm) {
    EncodingTable table = encode_tree_states(tape, model, tree);
    states = hlm_states(tape, model, tree, table).incoming;
  } else {
    states = sequence_states(tape, model, tree.ids);
  }
  Value projection = tape.param(*model.out_proj);
  std::vector<std::vector<double>> probs;
  probs.reserve(states.size());
  for (const StateV& state : states) {
    Value logits = tape.matmul(projection, state.h);
    probs.push_back(softmax(logits.data()));
  }
  return probs;
}

Completion complete(const Model& model, const Ast& prefix, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "completion needs k >= 1");
  if (prefix.size() < 1) fail(ErrorCode::InvalidPrefix, "prefix tree is empty");

  EncodedAst encoded = encode_tree(prefix, model.vocab);
  const auto hole = static_cast<std::size_t>(prefix.size() - 1);
  const std::vector<double> probs = node_predictions(model, encoded)[hole];

  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[static_cast<std::size_t>(a)] != probs[static_cast<std::size_t>(b)]
               ? probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)]
               : a < b;
  });

  Completion completion;
  completion.position = static_cast<int>(hole);
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), probs.size());
  completion.candidates.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const int id = order[i];
    completion.candidates.emplace_back(model.vocab.decode(id),
                                       probs[static_cast<std::size_t>(id)]);
  }
  return completion;
}

}  // namespace hlm
