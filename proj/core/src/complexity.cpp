#include "mlin/complexity.hpp"

#include <array>
#include <ostream>
#include <vector>

#include "mlin/error.hpp"

namespace mlin {

Mechanism parse_mechanism(const std::string& name) {
  if (name == "co_attention") return Mechanism::co_attention;
  if (name == "self_attention") return Mechanism::self_attention;
  if (name == "intra_inter") return Mechanism::intra_inter;
  if (name == "mli") return Mechanism::mli;
  throw ConfigError("unknown mechanism '" + name + "'");
}

std::string to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::co_attention:
      return "co_attention";
    case Mechanism::self_attention:
      return "self_attention";
    case Mechanism::intra_inter:
      return "intra_inter";
    case Mechanism::mli:
      return "mli";
  }
  return "co_attention";
}

std::span<const Mechanism> all_mechanisms() {
  static const std::array<Mechanism, 4> all = {
      Mechanism::co_attention, Mechanism::self_attention,
      Mechanism::intra_inter, Mechanism::mli};
  return all;
}

std::uint64_t count_closed_form(Mechanism mechanism, std::size_t m,
                                std::size_t n, std::size_t k) {
  const std::uint64_t um = m, un = n, uk = k;
  switch (mechanism) {
    case Mechanism::co_attention:
      return 2 * um * un;
    case Mechanism::self_attention:
      return um * um + un * un;
    case Mechanism::intra_inter:
      return (um + un) * (um + un);
    case Mechanism::mli:
      return uk * uk * (um + un);
  }
  return 0;
}

namespace {

// Tallies every query-key pair a mock execution evaluates. The checksum is
// the "work": one scalar logit per interaction.
class MessageMeter {
 public:
  void interact(double query, double key) {
    ++count_;
    checksum_ += query * key;
  }
  std::uint64_t count() const { return count_; }
  double checksum() const { return checksum_; }

 private:
  std::uint64_t count_ = 0;
  double checksum_ = 0.0;
};

std::vector<double> mock_features(std::size_t n, double base) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = base + 0.25 * static_cast<double>(i);
  }
  return out;
}

void attend_all(MessageMeter& meter, const std::vector<double>& queries,
                const std::vector<double>& keys) {
  for (double q : queries) {
    for (double k : keys) meter.interact(q, k);
  }
}

}  // namespace

std::uint64_t count_instrumented(Mechanism mechanism, std::size_t m,
                                 std::size_t n, std::size_t k) {
  const std::vector<double> regions = mock_features(m, 1.0);
  const std::vector<double> words = mock_features(n, 2.0);
  MessageMeter meter;
  switch (mechanism) {
    case Mechanism::co_attention:
      attend_all(meter, regions, words);
      attend_all(meter, words, regions);
      break;
    case Mechanism::self_attention:
      attend_all(meter, regions, regions);
      attend_all(meter, words, words);
      break;
    case Mechanism::intra_inter: {
      std::vector<double> tokens = regions;
      tokens.insert(tokens.end(), words.begin(), words.end());
      attend_all(meter, tokens, tokens);
      break;
    }
    case Mechanism::mli: {
      // Redistribution stage: every region and word feature attends the
      // k×k latent pairs.
      const std::vector<double> latents = mock_features(k * k, 3.0);
      attend_all(meter, regions, latents);
      attend_all(meter, words, latents);
      break;
    }
  }
  if (meter.checksum() == -1.0) return 0;  // keeps the work observable
  return meter.count();
}

std::uint64_t mli_summarization_messages(std::size_t m, std::size_t n,
                                         std::size_t k) {
  return static_cast<std::uint64_t>(k) * (m + n);
}

std::vector<MessageCount> compare_table(std::size_t m, std::size_t n,
                                        std::span<const std::size_t> k_list) {
  std::vector<MessageCount> rows;
  for (Mechanism mechanism : all_mechanisms()) {
    for (std::size_t k : k_list) {
      MessageCount row;
      row.mechanism = mechanism;
      row.m = m;
      row.n = n;
      row.k = k;
      row.messages = count_closed_form(mechanism, m, n, k);
      row.summarization_messages =
          mechanism == Mechanism::mli ? mli_summarization_messages(m, n, k) : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_messages_csv(std::ostream& out,
                        const std::vector<MessageCount>& rows) {
  out << "mechanism,m,n,k,messages,summarization_messages\n";
  for (const MessageCount& row : rows) {
    out << to_string(row.mechanism) << ',' << row.m << ',' << row.n << ','
        << row.k << ',' << row.messages << ',' << row.summarization_messages
        << '\n';
  }
}

}  // namespace mlin
