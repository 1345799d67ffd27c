#pragma once

#include <cstdint>
#include <string>

#include "hlm/cells.hpp"
#include "hlm/corpus.hpp"
#include "hlm/tensor.hpp"

namespace hlm {

inline constexpr const char* kToolVersion = "0.1.0";
// Normative cell/combiner equations of this implementation; recorded in
// every checkpoint so incompatible weights are rejected at load.
inline constexpr const char* kEquationsVersion = "hlm-cells/1";
inline constexpr const char* kCheckpointFormat = "hlm-checkpoint/1";

enum class ModelKind { Hlm, Lstm, Rnn };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// A trained (or freshly initialized) model: the vocabulary it was built
// against plus every trainable array, with named handles into the set.
//
// Parameter registration order is fixed per kind and is the checkpoint
// array order. Weight matrices are Xavier-uniform; biases zero except the
// forget-gate quarter of every LSTM bias, which starts at 1.
struct Model {
  ModelKind kind = ModelKind::Hlm;
  int d = 128;
  std::uint64_t seed = 1;
  Vocab vocab;
  ParamSet params;

  // All kinds.
  Param* tok_embed = nullptr;  // v x d token embeddings (tau)
  Param* out_proj = nullptr;   // v x d output projection V

  // HLM decoder.
  LstmParams dec_lstm;     // first-child transitions
  TwodLstmParams dec_2d;   // next-sibling transitions

  // HLM encoder.
  Param* leaf_cell = nullptr;  // v x d leaf subtree cell table
  Param* leaf_h = nullptr;     // v x d leaf subtree h table
  LstmParams enc_lstm;         // single-child combine
  LstmParams enc_fw;           // forward child BiLSTM
  LstmParams enc_bw;           // backward child BiLSTM
  TwodLstmParams enc_2d;       // multi-child root combine
  CombinerParams comb;         // descendant embedding combiner
  Param* empty_des_cell = nullptr;  // d x 1 descendants of a childless node
  Param* empty_des_h = nullptr;     // d x 1

  // LSTM baseline.
  LstmParams seq_lstm;

  // RNN baseline: h' = tanh(W [x; h] + b).
  Param* rnn_W = nullptr;  // d x 2d
  Param* rnn_b = nullptr;  // d

  Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
};

Model init_params(ModelKind kind, const Vocab& vocab, int d, std::uint64_t seed);

// Versioned JSON header line (format, equations, kind, v, d, seed, vocab,
// array index) followed by flat little-endian doubles in declared order.
// Round-trips bit-exactly.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace hlm
