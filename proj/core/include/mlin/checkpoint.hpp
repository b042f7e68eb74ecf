#pragma once

#include <filesystem>

#include "mlin/model.hpp"
#include "mlin/run_config.hpp"

namespace mlin {

/// "MLC1" checkpoints: magic, u32-length-prefixed config text (the exact
/// RunConfig serialization), u32 parameter count, then per parameter a
/// u32-length-prefixed name, u32 rank, u32 extents and the values as
/// little-endian f64. Parameters follow the model's canonical visit order,
/// so save -> load -> save is byte-identical.
void save_checkpoint(const std::filesystem::path& path, const RunConfig& cfg,
                     MlinModel& model);

struct LoadedCheckpoint {
  RunConfig config;
  MlinModel model;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mlin
