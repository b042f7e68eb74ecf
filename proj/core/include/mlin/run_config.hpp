#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mlin/mli.hpp"
#include "mlin/trainer.hpp"

namespace mlin {

/// Whole-run configuration: architecture, optimization schedule, dataset
/// parameters, seed and optional data paths. Serialized as a flat
/// `key = value` text document with `#` comments; unknown keys are
/// rejected. No environment variables are consulted anywhere.
struct RunConfig {
  // architecture
  std::size_t d_model = 512;
  std::size_t k = 6;
  std::size_t heads = 16;  // must divide d_model
  std::size_t head_dim = 128;
  std::size_t stacks = 1;
  std::string interaction = "product";          // product | addition | concat
  std::string aggregation_values = "projected";  // projected | identity
  double dropout = 0.1;

  // optimization
  std::size_t batch_size = 32;
  std::size_t epochs = 7;
  double base_lr = 0.005;
  std::size_t warmup_steps = 1000;
  double decay_lr = 0.0005;
  std::size_t decay_epoch = 7;
  double clip_norm = 0.25;
  double early_stop_train_acc = 0.0;  // 0 disables

  // data
  std::size_t d_in = 16;
  std::size_t classes = 12;
  std::size_t train_count = 10000;
  std::size_t test_count = 2000;
  double noise_sigma = 0.05;
  std::uint64_t seed = 42;
  std::string train_data;  // optional feature-file path; empty -> synthetic
  std::string test_data;

  /// Throws ConfigError naming the line of the first unknown key or bad
  /// value.
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  /// Canonical text form; parse(serialize()) reproduces the config exactly.
  std::string serialize() const;

  MliConfig mli_config() const;
  LrSchedule schedule() const;
  TrainOptions train_options() const;
  void validate() const;
};

}  // namespace mlin
