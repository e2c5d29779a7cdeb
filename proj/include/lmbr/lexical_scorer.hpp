#pragma once

#include <map>
#include <utility>
#include <vector>

#include "lmbr/scorer.hpp"

namespace lmbr {

/// Toy source-conditioned translation model. Output position t reads the
/// source word at the proportionally mapped position j and its neighbours
/// with weights (0.15, 0.7, 0.15):
///   P(y | x, t) = (1 - eps) * sum_d a_d * p(y | x_{j+d}),   P(EOS) = eps
/// and once t reaches |x| the mass flips (EOS 1 - eps, the rest eps).
/// p(y | f) is add-k smoothed from window-weighted co-occurrence counts on
/// a parallel corpus. Meant to be ensembled with an NgramLM over the same
/// vocabulary.
class LexicalScorer : public Scorer {
 public:
  /// `vocabulary` must contain UNK and EOS; target tokens outside it count
  /// as UNK.
  static LexicalScorer train(const std::vector<std::vector<TokenId>>& sources,
                             const std::vector<std::vector<TokenId>>& targets, std::vector<TokenId> vocabulary,
                             double k = 0.01, double eps = 0.02);

  /// log P(y | x, t) for the next output position t.
  double logprob(std::span<const TokenId> source, std::size_t t, TokenId y) const;

  ScorerState start(std::span<const TokenId> source) override;
  Distribution distribution(const ScorerState& state) override;
  ScorerState advance(const ScorerState& state, TokenId token) override;
  std::vector<TokenId> vocabulary() const override { return vocab_; }

 private:
  LexicalScorer() = default;
  std::vector<double> position_mix(std::span<const TokenId> source, std::size_t t) const;

  std::vector<TokenId> vocab_;                 // sorted, includes UNK and EOS
  std::map<TokenId, std::size_t> index_;       // token -> slot in vocab_
  std::map<TokenId, std::vector<double>> table_;  // source word -> p(y | f) per slot
  double eps_ = 0.02;
};

}  // namespace lmbr
