#pragma once

#include <filesystem>

#include "mlin/dataset.hpp"

namespace mlin {

/// "MLF1" feature files: magic, u32 record count, then per record
/// u32 M, u32 N, u32 d_in, u32 label followed by M·d_in region and N·d_in
/// word values as little-endian f32, row-major. The byte length is fully
/// determined by the header chain; truncated or oversized files are
/// rejected with the offending byte offset.
void write_feature_file(const std::filesystem::path& path,
                        const Dataset& data);

Dataset read_feature_file(const std::filesystem::path& path);

}  // namespace mlin
