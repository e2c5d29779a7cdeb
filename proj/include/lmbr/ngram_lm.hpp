#pragma once

#include <array>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lmbr/ngram.hpp"
#include "lmbr/scorer.hpp"

namespace lmbr {

/// Interpolated add-k n-gram language model:
///   P_1(w)   = (c(w) + k) / (N + k|V|)
///   P_n(w|h) = (c(h w) + k|V| P_{n-1}(w|h')) / (c(h) + k|V|)
/// where h' drops the oldest token of h. V holds the training types plus
/// UNK and EOS; EOS is counted once per sentence. Sentence-initial
/// contexts are padded with EOS. Tokens outside V are mapped to UNK.
class NgramLM : public Scorer {
 public:
  static NgramLM train(const std::vector<std::vector<TokenId>>& corpus, int order = 3, double k = 0.1);

  int order() const { return order_; }
  double k() const { return k_; }
  bool in_vocabulary(TokenId t) const { return vocab_set_.count(t) != 0; }

  /// log P(w | context), using the last order-1 tokens of `context`.
  double conditional_logprob(std::span<const TokenId> context, TokenId w) const;
  /// Whole-sentence log-probability including the EOS event, computed
  /// directly from sliding windows.
  double sentence_logprob(std::span<const TokenId> tokens) const;

  ScorerState start(std::span<const TokenId> source) override;
  Distribution distribution(const ScorerState& state) override;
  ScorerState advance(const ScorerState& state, TokenId token) override;
  std::vector<TokenId> vocabulary() const override { return vocab_; }

 private:
  NgramLM() = default;
  TokenId map(TokenId t) const { return in_vocabulary(t) ? t : kUnk; }
  double prob(std::span<const TokenId> context, TokenId w) const;

  int order_ = 3;
  double k_ = 0.1;
  std::vector<TokenId> vocab_;
  std::unordered_set<TokenId> vocab_set_;
  // Index n-1 holds counts of n-grams (full events) and of their n-1 token
  // contexts.
  std::array<std::unordered_map<Ngram, double, NgramHash>, kMaxOrder> events_;
  std::array<std::unordered_map<Ngram, double, NgramHash>, kMaxOrder> contexts_;
  double total_events_ = 0.0;
};

}  // namespace lmbr
