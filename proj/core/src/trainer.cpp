#include "mlin/trainer.hpp"

#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "mlin/error.hpp"

namespace mlin {

namespace {

template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

// Batches of sample indices, each batch holding samples with identical
// (M, N) so a batch is just a list of same-shaped forwards.
std::vector<std::vector<std::size_t>> make_batches(const Dataset& data,
                                                   std::size_t batch_size,
                                                   Rng& rng) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>>
      groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    groups[{data[i].regions.rows(), data[i].words.rows()}].push_back(i);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (auto& [key, indices] : groups) {
    shuffle_in_place(indices, rng);
    for (std::size_t start = 0; start < indices.size(); start += batch_size) {
      const std::size_t stop = std::min(start + batch_size, indices.size());
      batches.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(start),
                           indices.begin() + static_cast<std::ptrdiff_t>(stop));
    }
  }
  shuffle_in_place(batches, rng);
  return batches;
}

}  // namespace

TrainResult train(MlinModel& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainOptions& opts,
                  std::ostream* progress) {
  if (train_set.empty()) {
    throw std::invalid_argument("train: training set is empty");
  }
  if (opts.batch_size == 0) {
    throw ConfigError("train: batch_size must be positive");
  }
  std::vector<Tensor> params = model.parameters();
  Adamax optimizer(params, opts.schedule);
  Rng shuffle_rng(derive_seed(opts.seed, 1));
  Rng dropout_rng(derive_seed(opts.seed, 2));

  TrainResult result;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& batch : make_batches(train_set, opts.batch_size,
                                          shuffle_rng)) {
      optimizer.zero_grad();
      const double inv_batch = 1.0 / static_cast<double>(batch.size());
      for (std::size_t index : batch) {
        const Sample& sample = train_set[index];
        Tape tape;
        ForwardResult out =
            forward(tape, model, sample.regions, sample.words, &dropout_rng);
        Tensor loss = cross_entropy(tape, out.logits, sample.label);
        loss_sum += loss.value();
        correct += argmax(out.logits.values()) == sample.label ? 1 : 0;
        tape.backward(scale(tape, loss, inv_batch));
      }
      clip_gradients(params, opts.clip_norm);
      optimizer.step(epoch);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_sum / static_cast<double>(train_set.size());
    record.train_acc =
        static_cast<double>(correct) / static_cast<double>(train_set.size());
    record.val_acc = val_set.empty() ? 0.0 : evaluate(model, val_set);
    record.lr = optimizer.last_lr();
    result.log.push_back(record);
    if (progress != nullptr) {
      *progress << "epoch " << epoch << " loss " << record.mean_loss
                << " train_acc " << record.train_acc << " val_acc "
                << record.val_acc << " lr " << record.lr << "\n";
    }
    if (opts.early_stop_train_acc > 0.0 &&
        record.train_acc >= opts.early_stop_train_acc) {
      break;
    }
  }
  return result;
}

double evaluate(const MlinModel& model, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("evaluate: dataset is empty");
  }
  std::size_t correct = 0;
  for (const Sample& sample : data) {
    Tape tape(false);
    ForwardResult out =
        forward(tape, model, sample.regions, sample.words, nullptr);
    if (argmax(out.logits.values()) == sample.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace mlin
