#include "mlin/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mlin/error.hpp"

namespace mlin {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view value, const std::string& key,
               std::size_t line) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("bad value '" + std::string(value) + "' for key '" +
                      key + "' at line " + std::to_string(line));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  using Setter = std::function<void(std::string_view, std::size_t)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"d_model", [&](auto v, auto l) { cfg.d_model = parse_number<std::size_t>(v, "d_model", l); }},
      {"k", [&](auto v, auto l) { cfg.k = parse_number<std::size_t>(v, "k", l); }},
      {"heads", [&](auto v, auto l) { cfg.heads = parse_number<std::size_t>(v, "heads", l); }},
      {"head_dim", [&](auto v, auto l) { cfg.head_dim = parse_number<std::size_t>(v, "head_dim", l); }},
      {"stacks", [&](auto v, auto l) { cfg.stacks = parse_number<std::size_t>(v, "stacks", l); }},
      {"interaction", [&](auto v, auto) { cfg.interaction = std::string(v); }},
      {"aggregation_values", [&](auto v, auto) { cfg.aggregation_values = std::string(v); }},
      {"dropout", [&](auto v, auto l) { cfg.dropout = parse_number<double>(v, "dropout", l); }},
      {"batch_size", [&](auto v, auto l) { cfg.batch_size = parse_number<std::size_t>(v, "batch_size", l); }},
      {"epochs", [&](auto v, auto l) { cfg.epochs = parse_number<std::size_t>(v, "epochs", l); }},
      {"base_lr", [&](auto v, auto l) { cfg.base_lr = parse_number<double>(v, "base_lr", l); }},
      {"warmup_steps", [&](auto v, auto l) { cfg.warmup_steps = parse_number<std::size_t>(v, "warmup_steps", l); }},
      {"decay_lr", [&](auto v, auto l) { cfg.decay_lr = parse_number<double>(v, "decay_lr", l); }},
      {"decay_epoch", [&](auto v, auto l) { cfg.decay_epoch = parse_number<std::size_t>(v, "decay_epoch", l); }},
      {"clip_norm", [&](auto v, auto l) { cfg.clip_norm = parse_number<double>(v, "clip_norm", l); }},
      {"early_stop_train_acc", [&](auto v, auto l) { cfg.early_stop_train_acc = parse_number<double>(v, "early_stop_train_acc", l); }},
      {"d_in", [&](auto v, auto l) { cfg.d_in = parse_number<std::size_t>(v, "d_in", l); }},
      {"classes", [&](auto v, auto l) { cfg.classes = parse_number<std::size_t>(v, "classes", l); }},
      {"train_count", [&](auto v, auto l) { cfg.train_count = parse_number<std::size_t>(v, "train_count", l); }},
      {"test_count", [&](auto v, auto l) { cfg.test_count = parse_number<std::size_t>(v, "test_count", l); }},
      {"noise_sigma", [&](auto v, auto l) { cfg.noise_sigma = parse_number<double>(v, "noise_sigma", l); }},
      {"seed", [&](auto v, auto l) { cfg.seed = parse_number<std::uint64_t>(v, "seed", l); }},
      {"train_data", [&](auto v, auto) { cfg.train_data = std::string(v); }},
      {"test_data", [&](auto v, auto) { cfg.test_data = std::string(v); }},
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value' at line " +
                        std::to_string(line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("unknown key '" + key + "' at line " +
                        std::to_string(line_no));
    }
    it->second(value, line_no);
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "# architecture\n";
  out << "d_model = " << d_model << "\n";
  out << "k = " << k << "\n";
  out << "heads = " << heads << "\n";
  out << "head_dim = " << head_dim << "\n";
  out << "stacks = " << stacks << "\n";
  out << "interaction = " << interaction << "\n";
  out << "aggregation_values = " << aggregation_values << "\n";
  out << "dropout = " << format_double(dropout) << "\n";
  out << "# optimization\n";
  out << "batch_size = " << batch_size << "\n";
  out << "epochs = " << epochs << "\n";
  out << "base_lr = " << format_double(base_lr) << "\n";
  out << "warmup_steps = " << warmup_steps << "\n";
  out << "decay_lr = " << format_double(decay_lr) << "\n";
  out << "decay_epoch = " << decay_epoch << "\n";
  out << "clip_norm = " << format_double(clip_norm) << "\n";
  out << "early_stop_train_acc = " << format_double(early_stop_train_acc)
      << "\n";
  out << "# data\n";
  out << "d_in = " << d_in << "\n";
  out << "classes = " << classes << "\n";
  out << "train_count = " << train_count << "\n";
  out << "test_count = " << test_count << "\n";
  out << "noise_sigma = " << format_double(noise_sigma) << "\n";
  out << "seed = " << seed << "\n";
  out << "train_data = " << train_data << "\n";
  out << "test_data = " << test_data << "\n";
  return out.str();
}

MliConfig RunConfig::mli_config() const {
  MliConfig cfg;
  cfg.d_model = d_model;
  cfg.k = k;
  cfg.heads = heads;
  cfg.head_dim = head_dim;
  cfg.stacks = stacks;
  cfg.interaction = parse_interaction_op(interaction);
  cfg.identity_values = aggregation_values == "identity";
  cfg.dropout_rate = dropout;
  cfg.validate();
  return cfg;
}

LrSchedule RunConfig::schedule() const {
  LrSchedule s;
  s.base_lr = base_lr;
  s.warmup_steps = warmup_steps;
  s.decay_lr = decay_lr;
  s.decay_epoch = decay_epoch;
  return s;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions opts;
  opts.epochs = epochs;
  opts.batch_size = batch_size;
  opts.clip_norm = clip_norm;
  opts.schedule = schedule();
  opts.seed = seed;
  opts.early_stop_train_acc = early_stop_train_acc;
  return opts;
}

void RunConfig::validate() const {
  if (aggregation_values != "projected" && aggregation_values != "identity") {
    throw ConfigError("aggregation_values must be 'projected' or 'identity'");
  }
  mli_config();  // validates the architecture block
  if (classes < 2) throw ConfigError("classes must be >= 2");
  if (d_in == 0) throw ConfigError("d_in must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

}  // namespace mlin
