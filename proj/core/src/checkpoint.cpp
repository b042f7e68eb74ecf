#include "mlin/checkpoint.hpp"

#include "io_bytes.hpp"
#include "mlin/error.hpp"

namespace mlin {

void save_checkpoint(const std::filesystem::path& path, const RunConfig& cfg,
                     MlinModel& model) {
  std::vector<std::uint8_t> buf;
  io::append_bytes(buf, "MLC1", 4);
  const std::string config_text = cfg.serialize();
  io::append_u32(buf, static_cast<std::uint32_t>(config_text.size()));
  io::append_bytes(buf, config_text.data(), config_text.size());

  auto named = model.named_parameters();
  io::append_u32(buf, static_cast<std::uint32_t>(named.size()));
  for (auto& [name, tensor] : named) {
    io::append_u32(buf, static_cast<std::uint32_t>(name.size()));
    io::append_bytes(buf, name.data(), name.size());
    io::append_u32(buf, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t extent : tensor.shape()) {
      io::append_u32(buf, static_cast<std::uint32_t>(extent));
    }
    for (double v : tensor.values()) io::append_f64(buf, v);
  }
  io::write_file_atomic(path, buf);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  io::ByteReader reader(path);
  reader.magic("MLC1");
  const std::uint32_t config_len = reader.u32("config length");
  const std::string config_text =
      reader.string_block(config_len, "config text");

  LoadedCheckpoint out{RunConfig::parse(config_text), MlinModel{}};
  Rng init_rng(0);  // immediately overwritten by the stored parameters
  out.model = MlinModel::init(out.config.mli_config(), out.config.d_in,
                              out.config.classes, init_rng);

  auto named = out.model.named_parameters();
  const std::uint32_t stored = reader.u32("parameter count");
  if (stored != named.size()) {
    throw DataError(path.string() + ": expected " +
                    std::to_string(named.size()) + " parameters, found " +
                    std::to_string(stored));
  }
  for (auto& [name, tensor] : named) {
    const std::uint32_t name_len = reader.u32("parameter name length");
    const std::string stored_name =
        reader.string_block(name_len, "parameter name");
    if (stored_name != name) {
      throw DataError(path.string() + ": parameter '" + stored_name +
                      "' where '" + name + "' was expected (byte offset " +
                      std::to_string(reader.offset()) + ")");
    }
    const std::uint32_t rank = reader.u32("parameter rank");
    Shape shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape[i] = reader.u32("parameter extent");
    }
    if (shape != tensor.shape()) {
      throw DataError(path.string() + ": parameter '" + name + "' has shape " +
                      shape_str(shape) + ", expected " +
                      shape_str(tensor.shape()));
    }
    for (double& v : tensor.mutable_values()) {
      v = reader.f64("parameter values");
    }
  }
  reader.expect_done();
  return out;
}

}  // namespace mlin
