#pragma once

#include <array>
#include <vector>

#include "lmbr/symbols.hpp"

namespace lmbr {

inline constexpr int kBleuOrder = 4;

/// Sufficient statistics for corpus BLEU; add per-sentence stats together.
struct BleuStats {
  std::array<double, kBleuOrder> matches{};
  std::array<double, kBleuOrder> totals{};
  double candidate_length = 0.0;
  double reference_length = 0.0;

  BleuStats& operator+=(const BleuStats& o);
  /// Geometric mean of the modified precisions times the brevity penalty
  /// exp(min(0, 1 - r/c)). Orders with no candidate n-grams at all are left
  /// out of the mean; an order with n-grams but no matches gives zero.
  double score() const;
};

/// Clipped n-gram matches of one candidate against one reference.
BleuStats sentence_stats(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference);

/// Single-reference, unsmoothed corpus BLEU in [0, 1]. Throws DataError on a
/// count mismatch or an empty candidate set.
double corpus_bleu(const std::vector<std::vector<TokenId>>& candidates,
                   const std::vector<std::vector<TokenId>>& references);

}  // namespace lmbr
