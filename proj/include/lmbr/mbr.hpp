#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lmbr/ngram.hpp"
#include "lmbr/posteriors.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

/// Length reward theta0 and per-order n-gram weights theta1..theta4.
struct MbrWeights {
  double theta0 = 1.0;
  std::array<double, kMaxOrder> theta{1.0, 1.0, 1.0, 1.0};

  double order_weight(int n) const { return theta[static_cast<std::size_t>(n - 1)]; }
};

struct CombinationConfig {
  double lambda = 1.0;  // scorer weight
  MbrWeights weights;
  const PosteriorTable* table = nullptr;  // null behaves as an empty table
};

/// A (partial) output sequence. `tokens` never contains EOS; `complete` is
/// set when EOS was chosen by the search rather than forced by a length cap.
struct Hypothesis {
  std::vector<TokenId> tokens;
  double evidence = 0.0;
  double scorer_logprob = 0.0;
  double score = 0.0;  // evidence + lambda * scorer_logprob
  bool complete = false;
};

/// theta0 * |y| + sum over distinct n-grams u of theta_|u| * #u(y) * P(u).
/// A trailing EOS is ignored.
double evidence(std::span<const TokenId> y, const CombinationConfig& cfg);

/// Gain of appending `next` to `history`: theta0 plus the weighted
/// posteriors of the order-n n-grams ending at the new position. EOS gains
/// nothing.
double stepwise_gain(std::span<const TokenId> history, TokenId next, const CombinationConfig& cfg);

/// Left-to-right fold of stepwise_gain; equals evidence().
double accumulate_evidence(std::span<const TokenId> y, const CombinationConfig& cfg);

double combined_score(std::span<const TokenId> y, double scorer_logprob, const CombinationConfig& cfg);

struct RescoreResult {
  std::size_t index = 0;
  double evidence = 0.0;
};

/// Index of the hypothesis with the highest evidence; ties go to the
/// earlier entry. Throws DataError on an empty list.
RescoreResult lmbr_rescore(const std::vector<std::vector<TokenId>>& hypotheses, const CombinationConfig& cfg);

}  // namespace lmbr
