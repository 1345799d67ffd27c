#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hlm/eval.hpp"
#include "hlm/optim.hpp"

namespace hlm {

struct TrainConfig {
  ModelKind kind = ModelKind::Hlm;
  int d = 128;
  std::uint64_t seed = 1;
  AdamConfig adam;
  int max_epochs = 20;
  int patience = 1;    // consecutive validation drops tolerated
  int eval_every = 1;  // epochs between validation evaluations
  int unk_k = 3;
};

// Patience-1 rule by default: stop as soon as validation top-1 accuracy
// drops below the best seen; higher patience tolerates consecutive drops.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when training should stop after this observation.
  bool observe(double valid_top1) {
    const bool improved = valid_top1 > best_;
    if (improved) {
      best_ = valid_top1;
      best_index_ = count_;
      drops_ = 0;
    } else if (valid_top1 < best_) {
      ++drops_;
    } else {
      drops_ = 0;
    }
    ++count_;
    return drops_ >= patience_;
  }

  double best() const { return best_; }
  int best_index() const { return best_index_; }  // 0-based observation index

 private:
  int patience_;
  int drops_ = 0;
  int count_ = 0;
  int best_index_ = -1;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double mean_train_loss = 0;
  double valid_top1 = 0;
  bool evaluated = false;
};

struct TrainResult {
  Model model;  // parameters restored to the best validation checkpoint
  Vocab vocab;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_valid_top1 = 0;
};

// Per-example training: one Adam update per training tree, seeded shuffle
// per epoch (epoch seed = splitmix64(seed + epoch)), validation top-1 after
// each eval_every epochs, early stopping per the patience rule. The best
// checkpoint is retained. Bit-identical results for identical config+data.
TrainResult train(const std::vector<Ast>& train_trees, const std::vector<Ast>& valid_trees,
                  const TrainConfig& config);

std::string train_log_to_jsonl(const std::vector<EpochLog>& log);

}  // namespace hlm
