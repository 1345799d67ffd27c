#pragma once

#include "hlm/tensor.hpp"

namespace hlm {

// The (cell, h) pair flowing on every transition and representing every
// encoded subtree.
struct StateV {
  Value cell;
  Value h;
};

struct LstmParams {
  Param* W = nullptr;  // 4d x 2d, gate order [i, f, o, g]
  Param* b = nullptr;  // 4d
};

struct TwodLstmParams {
  Param* W = nullptr;  // 5d x 3d, gate order [i, j, f_a, f_b, o]
  Param* b = nullptr;  // 5d
};

struct CombinerParams {
  Param* W3 = nullptr;  // 5d x 2d, gate order [i, j, f1, f2, o]
  Param* b3 = nullptr;  // 5d
};

// Standard LSTM step:
//   [zi, zf, zo, zg] = split(W [x; h_prev] + b)
//   cell' = sigmoid(zf) * cell_prev + sigmoid(zi) * tanh(zg)
//   h'    = sigmoid(zo) * tanh(cell')
StateV lstm_step(Tape& tape, const LstmParams& p, Value x, const StateV& prev);

// Two-dimensional LSTM step over two predecessor states, one forget gate
// each:
//   [zi, zj, zfa, zfb, zo] = split(W [x; h_a; h_b] + b)
//   cell' = tanh(zi) * sigmoid(zj) + cell_a * sigmoid(zfa) + cell_b * sigmoid(zfb)
//   h'    = tanh(cell') * sigmoid(zo)
StateV twod_lstm_step(Tape& tape, const TwodLstmParams& p, Value x, const StateV& a,
                      const StateV& b);

// Gated combiner producing the descendant embedding of a multi-child node
// from the forward/backward BiLSTM end states:
//   [i, j, f1, f2, o] = split(W3 [h_f1; h_f2] + b3)
//   l1 = tanh(i) * sigmoid(j)
//   l2 = l1 + cell_f1 * sigmoid(f1)
//   l3 = l2 + cell_f2 * sigmoid(f2)
//   cell_des = tanh(l3)
//   h_des    = cell_des * sigmoid(o)
StateV combiner(Tape& tape, const CombinerParams& p, const StateV& f1, const StateV& f2);

}  // namespace hlm
