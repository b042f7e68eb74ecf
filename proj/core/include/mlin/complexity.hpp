#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlin {

/// Message-passing accounting for attention mechanisms over M region and N
/// word features. A message is one query-key interaction: one scalar
/// attention logit evaluated.
enum class Mechanism { co_attention, self_attention, intra_inter, mli };

Mechanism parse_mechanism(const std::string& name);
std::string to_string(Mechanism mechanism);
std::span<const Mechanism> all_mechanisms();

struct MessageCount {
  Mechanism mechanism = Mechanism::co_attention;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;  // latent summaries per modality; ignored outside mli
  std::uint64_t messages = 0;
  /// Supplementary: messages spent building the k summaries per modality
  /// (k·(M+N), mli only). Reported in its own column because the headline
  /// mli figure covers only the redistribution stage.
  std::uint64_t summarization_messages = 0;
};

/// Exact closed forms: co-attention 2MN, self-attention M²+N², intra-inter
/// (M+N)², mli k²(M+N).
std::uint64_t count_closed_form(Mechanism mechanism, std::size_t m,
                                std::size_t n, std::size_t k);

/// Runs a mock executor that evaluates every query-key pair the mechanism
/// visits and tallies them; cross-validates the closed forms.
std::uint64_t count_instrumented(Mechanism mechanism, std::size_t m,
                                 std::size_t n, std::size_t k);

std::uint64_t mli_summarization_messages(std::size_t m, std::size_t n,
                                         std::size_t k);

/// One row per (mechanism, k) pair.
std::vector<MessageCount> compare_table(std::size_t m, std::size_t n,
                                        std::span<const std::size_t> k_list);

void write_messages_csv(std::ostream& out,
                        const std::vector<MessageCount>& rows);

}  // namespace mlin
