#pragma once

#include <span>
#include <string>
#include <vector>

#include "hlm/decoder.hpp"

namespace hlm {

// Outcome of one node prediction: 1-based rank of the oracle token under
// the (descending probability, ascending token id) order, and whether the
// oracle token was out of vocabulary.
struct NodeJudgment {
  int rank = 1;
  bool oov = false;
};

struct EvalReport {
  std::string dataset;
  std::string model;
  double top1 = 0, top3 = 0, top6 = 0, top10 = 0;  // percent
  double mrr = 0;
  std::size_t nodes = 0;
  std::size_t oov_nodes = 0;
};

// Micro-average over nodes. A top-k hit needs rank <= k AND an in-vocabulary
// oracle; the reciprocal rank of an OOV oracle counts as 0.
EvalReport metrics_from_judgments(std::span<const NodeJudgment> judgments);

int oracle_rank(std::span<const double> probs, int oracle);

// Judges every node of every tree with the model's predictions. `workers`
// splits trees across threads; aggregation order is fixed, so results are
// identical for any worker count.
EvalReport evaluate(const Model& model, const std::vector<EncodedAst>& trees, int workers = 1);

std::string report_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> report_from_json(const std::string& json_text);

// Fixed-width comparison table (DS/MD/top1/top3/top6/top10/mrr); rows
// grouped by dataset with models ordered RNN, LSTM, HLM.
std::string render_report_table(std::vector<EvalReport> reports);

}  // namespace hlm
