// Command-line front end: training, evaluation, gradient checking,
// message-passing accounting and attention-trace export.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 check failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlin/checkpoint.hpp"
#include "mlin/complexity.hpp"
#include "mlin/error.hpp"
#include "mlin/feature_file.hpp"
#include "mlin/gradcheck.hpp"
#include "mlin/run_config.hpp"
#include "mlin/synthetic.hpp"
#include "mlin/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckFailed = 3;

// Seed streams derived from the run seed: 0 data generation, 1 shuffle,
// 2 dropout (both inside the trainer), 3 model init, 7 gradcheck inputs.
constexpr std::uint64_t kStreamData = 0;
constexpr std::uint64_t kStreamInit = 3;
constexpr std::uint64_t kStreamGradcheck = 7;

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw mlin::DataError("cannot open " + tmp.string() + " for writing");
    }
    out << text;
    if (!out) throw mlin::DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct DataPair {
  mlin::Dataset train;
  mlin::Dataset test;
  bool generated = false;
};

DataPair load_or_generate(const mlin::RunConfig& cfg) {
  DataPair out;
  if (!cfg.train_data.empty()) {
    out.train = mlin::read_feature_file(cfg.train_data);
    if (!cfg.test_data.empty()) {
      out.test = mlin::read_feature_file(cfg.test_data);
    }
    return out;
  }
  mlin::GeneratorOptions gen;
  gen.noise_sigma = cfg.noise_sigma;
  auto [train, test] = mlin::generate_split(
      mlin::derive_seed(cfg.seed, kStreamData), cfg.train_count,
      cfg.test_count, gen);
  out.train = std::move(train.features);
  out.test = std::move(test.features);
  out.generated = true;
  return out;
}

json tensor_to_json(const mlin::Tensor& t) {
  json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.values().begin(), t.values().end());
  return j;
}

json heads_to_json(const std::vector<mlin::Tensor>& heads) {
  // One [rows x cols] block per head, exported as [H, rows, cols].
  json j;
  std::vector<std::size_t> shape = {heads.size(), heads[0].rows(),
                                    heads[0].cols()};
  std::vector<double> data;
  for (const mlin::Tensor& head : heads) {
    data.insert(data.end(), head.values().begin(), head.values().end());
  }
  j["shape"] = shape;
  j["data"] = std::move(data);
  return j;
}

int run_train(const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed, bool seed_given) {
  mlin::RunConfig cfg = mlin::RunConfig::load(config_path);
  if (seed_given) cfg.seed = seed;
  fs::create_directories(out_dir);

  DataPair data = load_or_generate(cfg);
  if (data.generated) {
    mlin::write_feature_file(fs::path(out_dir) / "train.mlf", data.train);
    mlin::write_feature_file(fs::path(out_dir) / "test.mlf", data.test);
  }

  mlin::Rng init_rng(mlin::derive_seed(cfg.seed, kStreamInit));
  mlin::MlinModel model =
      mlin::MlinModel::init(cfg.mli_config(), cfg.d_in, cfg.classes, init_rng);
  std::cout << "training on " << data.train.size() << " samples ("
            << model.parameter_count() << " parameters)\n";

  mlin::TrainResult result =
      mlin::train(model, data.train, data.test, cfg.train_options(),
                  &std::cout);

  std::ostringstream log;
  for (const mlin::EpochRecord& r : result.log) {
    json line;
    line["epoch"] = r.epoch;
    line["mean_loss"] = r.mean_loss;
    line["train_acc"] = r.train_acc;
    line["val_acc"] = r.val_acc;
    line["lr"] = r.lr;
    log << line.dump() << "\n";
  }
  write_text_atomic(fs::path(out_dir) / "train_log.jsonl", log.str());
  mlin::save_checkpoint(fs::path(out_dir) / "model.mlc", cfg, model);
  std::cout << "wrote " << (fs::path(out_dir) / "model.mlc").string()
            << " and train_log.jsonl\n";
  return kExitOk;
}

int run_eval(const std::string& checkpoint_path, const std::string& data_path) {
  mlin::LoadedCheckpoint loaded = mlin::load_checkpoint(checkpoint_path);
  mlin::Dataset data = mlin::read_feature_file(data_path);
  if (data.empty()) {
    throw mlin::DataError(data_path + ": no records to evaluate");
  }
  const double accuracy = mlin::evaluate(loaded.model, data);
  std::cout << "accuracy " << std::fixed << std::setprecision(6) << accuracy
            << "\n";
  return kExitOk;
}

int run_gradcheck(const std::string& config_path, double eps, double tol,
                  std::size_t m, std::size_t n) {
  mlin::RunConfig cfg = mlin::RunConfig::load(config_path);
  mlin::Rng init_rng(mlin::derive_seed(cfg.seed, kStreamInit));
  mlin::MlinModel model =
      mlin::MlinModel::init(cfg.mli_config(), cfg.d_in, cfg.classes, init_rng);

  mlin::Rng data_rng(mlin::derive_seed(cfg.seed, kStreamGradcheck));
  mlin::Sample sample;
  sample.regions = mlin::Tensor::zeros({m, cfg.d_in});
  sample.words = mlin::Tensor::zeros({n, cfg.d_in});
  for (double& v : sample.regions.mutable_values()) {
    v = data_rng.uniform(-1.0, 1.0);
  }
  for (double& v : sample.words.mutable_values()) {
    v = data_rng.uniform(-1.0, 1.0);
  }
  sample.label = data_rng.below(cfg.classes);

  const mlin::GradCheckReport report =
      mlin::gradient_check(model, sample, eps);
  for (const mlin::GradCheckGroup& group : report.groups) {
    std::cout << "group " << group.name << " max_rel_err "
              << group.max_rel_err << "\n";
  }
  std::cout << "worst " << report.worst << " tolerance " << tol << " -> "
            << (report.passed(tol) ? "PASS" : "FAIL") << "\n";
  return report.passed(tol) ? kExitOk : kExitCheckFailed;
}

int run_messages(std::size_t m, std::size_t n, const std::string& k_list) {
  std::vector<std::size_t> ks;
  std::stringstream stream(k_list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    std::size_t value = 0;
    try {
      value = static_cast<std::size_t>(std::stoull(item));
    } catch (const std::exception&) {
      throw mlin::ConfigError("bad k value '" + item + "' in --k-list");
    }
    if (value == 0) throw mlin::ConfigError("k values must be >= 1");
    ks.push_back(value);
  }
  if (ks.empty()) throw mlin::ConfigError("--k-list needs at least one value");
  mlin::write_messages_csv(std::cout, mlin::compare_table(m, n, ks));
  return kExitOk;
}

int run_export_attn(const std::string& checkpoint_path,
                    const std::string& data_path, std::size_t index,
                    const std::string& out_path) {
  mlin::LoadedCheckpoint loaded = mlin::load_checkpoint(checkpoint_path);
  mlin::Dataset data = mlin::read_feature_file(data_path);
  if (index >= data.size()) {
    throw mlin::DataError(data_path + ": record index " +
                          std::to_string(index) + " out of range (" +
                          std::to_string(data.size()) + " records)");
  }
  const mlin::Sample& sample = data[index];
  mlin::Tape tape(false);
  mlin::ForwardResult out = mlin::forward(tape, loaded.model, sample.regions,
                                          sample.words, nullptr);

  json doc;
  doc["index"] = index;
  doc["label"] = sample.label;
  doc["regions"] = sample.regions.rows();
  doc["words"] = sample.words.rows();
  doc["prediction"] = mlin::argmax(out.logits.values());
  doc["layers"] = json::array();
  for (const mlin::AttentionTrace& trace : out.traces) {
    json layer;
    layer["L_R"] = tensor_to_json(trace.l_r);
    layer["L_E"] = tensor_to_json(trace.l_e);
    layer["U_R"] = heads_to_json(trace.u_r);
    layer["U_E"] = heads_to_json(trace.u_e);
    doc["layers"].push_back(std::move(layer));
  }
  write_text_atomic(out_path, doc.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent cross-modal attention network: training, evaluation "
               "and attention accounting"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, data_path, attn_out;
  std::string k_list = "6";
  std::uint64_t seed = 0;
  double eps = 1e-5, tol = 1e-4;
  std::size_t m = 100, n = 14, gc_m = 5, gc_n = 4, index = 0;

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Run configuration file")
      ->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* seed_opt =
      train->add_option("--seed", seed, "Overrides the config seed");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  eval->add_option("--data", data_path, "Feature file")->required();

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--config", config_path, "Run configuration file")
      ->required();
  gradcheck->add_option("--eps", eps, "Finite-difference step");
  gradcheck->add_option("--tol", tol, "Relative-error tolerance");
  gradcheck->add_option("--m", gc_m, "Region rows in the probe sample");
  gradcheck->add_option("--n", gc_n, "Word rows in the probe sample");

  CLI::App* messages =
      app.add_subcommand("messages", "Message-passing comparison table");
  messages->add_option("--m", m, "Region count")->required();
  messages->add_option("--n", n, "Word count")->required();
  messages->add_option("--k-list", k_list, "Comma-separated summary counts");

  CLI::App* export_attn =
      app.add_subcommand("export-attn", "Export attention weights as JSON");
  export_attn->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  export_attn->add_option("--data", data_path, "Feature file")->required();
  export_attn->add_option("--index", index, "Record index")->required();
  export_attn->add_option("--out", attn_out, "Output JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      return run_train(config_path, out_dir, seed, seed_opt->count() > 0);
    }
    if (eval->parsed()) {
      return run_eval(checkpoint_path, data_path);
    }
    if (gradcheck->parsed()) {
      return run_gradcheck(config_path, eps, tol, gc_m, gc_n);
    }
    if (messages->parsed()) {
      return run_messages(m, n, k_list);
    }
    if (export_attn->parsed()) {
      return run_export_attn(checkpoint_path, data_path, index, attn_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
