#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mlin/dataset.hpp"
#include "mlin/model.hpp"
#include "mlin/optimizer.hpp"

namespace mlin {

struct TrainOptions {
  std::size_t epochs = 7;
  std::size_t batch_size = 32;
  double clip_norm = 0.25;
  LrSchedule schedule;
  std::uint64_t seed = 42;  // shuffle and dropout streams are derived from it
  /// Stop after the first epoch whose running training accuracy reaches
  /// this value; 0 disables early stopping.
  double early_stop_train_acc = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
};

/// Cross-entropy training with Adamax, global-norm gradient clipping and
/// the warmup/decay schedule. Batches group samples of equal (M, N) so no
/// padding or masking is ever needed; group order, in-group shuffles and
/// batch order are all driven by streams derived from opts.seed, so a seed
/// fixes the whole run. Loss is averaged over the batch by scaling each
/// sample's loss before its backward pass; gradients then sum across the
/// batch on the parameters.
TrainResult train(MlinModel& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainOptions& opts,
                  std::ostream* progress = nullptr);

/// Fraction of argmax-correct predictions, dropout disabled.
double evaluate(const MlinModel& model, const Dataset& data);

}  // namespace mlin
