#include "mlin/feature_file.hpp"

#include <limits>

#include "io_bytes.hpp"
#include "mlin/error.hpp"

namespace mlin {

void write_feature_file(const std::filesystem::path& path,
                        const Dataset& data) {
  std::vector<std::uint8_t> buf;
  buf.reserve(8 + data.size() * 64);
  io::append_bytes(buf, "MLF1", 4);
  io::append_u32(buf, static_cast<std::uint32_t>(data.size()));
  for (const Sample& sample : data) {
    if (sample.regions.rank() != 2 || sample.words.rank() != 2 ||
        sample.regions.cols() != sample.words.cols()) {
      throw DataError(
          "feature file records need rank-2 features of equal width, got " +
          shape_str(sample.regions.shape()) + " and " +
          shape_str(sample.words.shape()));
    }
    io::append_u32(buf, static_cast<std::uint32_t>(sample.regions.rows()));
    io::append_u32(buf, static_cast<std::uint32_t>(sample.words.rows()));
    io::append_u32(buf, static_cast<std::uint32_t>(sample.regions.cols()));
    io::append_u32(buf, static_cast<std::uint32_t>(sample.label));
    for (double v : sample.regions.values()) {
      io::append_f32(buf, static_cast<float>(v));
    }
    for (double v : sample.words.values()) {
      io::append_f32(buf, static_cast<float>(v));
    }
  }
  io::write_file_atomic(path, buf);
}

Dataset read_feature_file(const std::filesystem::path& path) {
  io::ByteReader reader(path);
  reader.magic("MLF1");
  const std::uint32_t count = reader.u32("record count");
  Dataset data;
  data.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t m = reader.u32("region count");
    const std::uint32_t n = reader.u32("word count");
    const std::uint32_t d = reader.u32("feature width");
    const std::uint32_t label = reader.u32("label");
    if (m == 0 || n == 0 || d == 0) {
      throw DataError(path.string() + ": record " + std::to_string(r) +
                      " has a zero extent (byte offset " +
                      std::to_string(reader.offset()) + ")");
    }
    Sample sample;
    sample.label = label;
    std::vector<double> regions(static_cast<std::size_t>(m) * d);
    for (double& v : regions) v = reader.f32("region features");
    std::vector<double> words(static_cast<std::size_t>(n) * d);
    for (double& v : words) v = reader.f32("word features");
    sample.regions = Tensor::from({m, d}, std::move(regions));
    sample.words = Tensor::from({n, d}, std::move(words));
    data.push_back(std::move(sample));
  }
  reader.expect_done();
  return data;
}

}  // namespace mlin
