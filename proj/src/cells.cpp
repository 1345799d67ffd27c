#include "hlm/cells.hpp"

namespace hlm {

StateV lstm_step(Tape& tape, const LstmParams& p, Value x, const StateV& prev) {
  Value joined = tape.concat_rows({x, prev.h});
  Value z = tape.add(tape.matmul(tape.param(*p.W), joined), tape.param(*p.b));
  auto gates = tape.split_rows(z, 4);
  Value i = tape.sigmoid(gates[0]);
  Value f = tape.sigmoid(gates[1]);
  Value o = tape.sigmoid(gates[2]);
  Value g = tape.tanh(gates[3]);
  Value cell = tape.add(tape.elementwise_mul(f, prev.cell), tape.elementwise_mul(i, g));
  Value h = tape.elementwise_mul(o, tape.tanh(cell));
  return {cell, h};
}

StateV twod_lstm_step(Tape& tape, const TwodLstmParams& p, Value x, const StateV& a,
                      const StateV& b) {
  Value joined = tape.concat_rows({x, a.h, b.h});
  Value z = tape.add(tape.matmul(tape.param(*p.W), joined), tape.param(*p.b));
  auto gates = tape.split_rows(z, 5);
  Value candidate = tape.elementwise_mul(tape.tanh(gates[0]), tape.sigmoid(gates[1]));
  Value keep_a = tape.elementwise_mul(a.cell, tape.sigmoid(gates[2]));
  Value keep_b = tape.elementwise_mul(b.cell, tape.sigmoid(gates[3]));
  Value cell = tape.add(tape.add(candidate, keep_a), keep_b);
  Value h = tape.elementwise_mul(tape.tanh(cell), tape.sigmoid(gates[4]));
  return {cell, h};
}

StateV combiner(Tape& tape, const CombinerParams& p, const StateV& f1, const StateV& f2) {
  Value joined = tape.concat_rows({f1.h, f2.h});
  Value z = tape.add(tape.matmul(tape.param(*p.W3), joined), tape.param(*p.b3));
  auto gates = tape.split_rows(z, 5);
  Value l1 = tape.elementwise_mul(tape.tanh(gates[0]), tape.sigmoid(gates[1]));
  Value l2 = tape.add(l1, tape.elementwise_mul(f1.cell, tape.sigmoid(gates[2])));
  Value l3 = tape.add(l2, tape.elementwise_mul(f2.cell, tape.sigmoid(gates[3])));
  Value cell_des = tape.tanh(l3);
  Value h_des = tape.elementwise_mul(cell_des, tape.sigmoid(gates[4]));
  return {cell_des, h_des};
}

}  // namespace hlm
