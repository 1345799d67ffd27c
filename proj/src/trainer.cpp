#include "hlm/trainer.hpp"

#include <numeric>

#include <json.hpp>

#include "hlm/rng.hpp"

namespace hlm {

TrainResult train(const std::vector<Ast>& train_trees, const std::vector<Ast>& valid_trees,
                  const TrainConfig& config) {
  if (train_trees.empty()) fail(ErrorCode::EmptySplit, "training split is empty");
  if (valid_trees.empty()) fail(ErrorCode::EmptySplit, "validation split is empty");

  const Vocab vocab = build_vocab(train_trees, config.unk_k);
  const std::vector<EncodedAst> train_set = encode_trees(train_trees, vocab);
  const std::vector<EncodedAst> valid_set = encode_trees(valid_trees, vocab);

  TrainResult result;
  result.model = init_params(config.kind, vocab, config.d, config.seed);
  result.vocab = vocab;
  Model& model = result.model;

  AdamState adam(model.params);
  EarlyStopping stopper(config.patience);
  std::vector<double> best_snapshot = model.params.snapshot_values();
  int best_epoch = 0;
  double best_top1 = -1;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::uint64_t epoch_state = config.seed + static_cast<std::uint64_t>(epoch);
    Rng rng(splitmix64(epoch_state));
    rng.shuffle(order);

    double loss_sum = 0;
    for (std::size_t idx : order) {
      Tape tape;
      Value loss = model_loss(tape, model, train_set[idx]);
      model.params.zero_grads();
      tape.backward(loss);
      adam.step(model.params, config.adam);
      loss_sum += loss.scalar();
    }

    EpochLog log;
    log.epoch = epoch;
    log.mean_train_loss = loss_sum / static_cast<double>(order.size());

    const bool eval_now = (epoch % std::max(1, config.eval_every)) == 0 ||
                          epoch == config.max_epochs;
    bool stop = false;
    if (eval_now) {
      const EvalReport report = evaluate(model, valid_set);
      log.valid_top1 = report.top1;
      log.evaluated = true;
      if (report.top1 > best_top1) {
        best_top1 = report.top1;
        best_epoch = epoch;
        best_snapshot = model.params.snapshot_values();
      }
      stop = stopper.observe(report.top1);
    }
    result.log.push_back(log);
    if (stop) break;
  }

  model.params.restore_values(best_snapshot);
  result.best_epoch = best_epoch;
  result.best_valid_top1 = best_top1 < 0 ? 0 : best_top1;
  return result;
}

std::string train_log_to_jsonl(const std::vector<EpochLog>& log) {
  std::string out;
  for (const EpochLog& entry : log) {
    nlohmann::ordered_json obj;
    obj["epoch"] = entry.epoch;
    obj["mean_train_loss"] = entry.mean_train_loss;
    if (entry.evaluated) obj["valid_top1"] = entry.valid_top1;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hlm
