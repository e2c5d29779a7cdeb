#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "lmbr/symbols.hpp"

namespace lmbr {

/// Opaque, copyable scorer state. Built-in scorers keep their context in
/// `words`; ensembles nest one child state per member.
struct ScorerState {
  std::vector<std::int64_t> words;
  std::vector<ScorerState> children;

  friend bool operator==(const ScorerState&, const ScorerState&) = default;
};

/// Next-token log-probabilities: explicit entries plus one default value for
/// every token outside them. Built-in scorers list their whole vocabulary
/// and use the UNK value as default, which is how OOV tokens get scored.
class Distribution {
 public:
  Distribution() = default;
  Distribution(std::vector<std::pair<TokenId, double>> entries, double default_logprob);

  double logprob(TokenId t) const;
  const std::vector<std::pair<TokenId, double>>& entries() const { return entries_; }
  double default_logprob() const { return default_; }
  /// Sum of exp(logprob) over the explicit entries.
  double mass() const;
  /// Highest-scoring explicit entry; ties to the smaller id.
  TokenId argmax() const;

 private:
  std::vector<std::pair<TokenId, double>> entries_;  // sorted by id
  double default_ = 0.0;
};

/// Left-to-right token scorer P(y_t | y_<t, x).
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScorerState start(std::span<const TokenId> source) = 0;
  virtual Distribution distribution(const ScorerState& state) = 0;
  virtual ScorerState advance(const ScorerState& state, TokenId token) = 0;
  /// Tokens the scorer knows, sorted; may be empty when unknown up front.
  virtual std::vector<TokenId> vocabulary() const = 0;
  /// True when log-probabilities never exceed zero.
  virtual bool normalized() const { return true; }
};

double score_step(Scorer& scorer, const ScorerState& state, TokenId token);

/// Sum of score_step over `tokens`, plus the EOS step when `with_eos`.
double sequence_logprob(Scorer& scorer, std::span<const TokenId> source, std::span<const TokenId> tokens,
                        bool with_eos = true);

/// Same value for every token in `vocabulary` (which should include EOS).
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(std::vector<TokenId> vocabulary);

  ScorerState start(std::span<const TokenId>) override { return {}; }
  Distribution distribution(const ScorerState&) override { return dist_; }
  ScorerState advance(const ScorerState& state, TokenId) override { return state; }
  std::vector<TokenId> vocabulary() const override { return vocab_; }

 private:
  std::vector<TokenId> vocab_;
  Distribution dist_;
};

/// Elementwise sum of member log-probabilities, renormalised by
/// log-sum-exp. Members must list the same tokens; throws DataError
/// otherwise.
Distribution ensemble_distribution(std::span<const Distribution> members);

/// Product-of-distributions ensemble over member scorers.
class EnsembleScorer : public Scorer {
 public:
  explicit EnsembleScorer(std::vector<std::shared_ptr<Scorer>> members);

  ScorerState start(std::span<const TokenId> source) override;
  Distribution distribution(const ScorerState& state) override;
  ScorerState advance(const ScorerState& state, TokenId token) override;
  std::vector<TokenId> vocabulary() const override;

 private:
  std::vector<std::shared_ptr<Scorer>> members_;
};

}  // namespace lmbr
